#include "dfvote/stat_verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/kernels.hpp"
#include "dfvote/special.hpp"

namespace dfvote {
namespace {

constexpr int kGridPoints = 21;
constexpr double kGridLimit = 3.0;

std::vector<double> axis_values() {
    std::vector<double> v;
    for (int i = 0; i < kGridPoints; ++i) v.push_back(-kGridLimit + 2.0 * kGridLimit * i / (kGridPoints - 1));
    return v;
}

std::string format_double(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw DataError("KS statistic of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    std::size_t i = 0;
    while (i < sample.size()) {
        // Ties share one CDF value; the empirical CDF jumps across the whole run.
        std::size_t j = i;
        while (j + 1 < sample.size() && sample[j + 1] == sample[i]) ++j;
        const double f = cdf(sample[i]);
        d = std::max(d, std::max(static_cast<double>(j + 1) / n - f, f - static_cast<double>(i) / n));
        i = j + 1;
    }
    return std::clamp(d, 0.0, 1.0);
}

double ks_threshold(std::int64_t count, double safety) {
    return safety * kKolmogorov999 / std::sqrt(static_cast<double>(count));
}

std::vector<double> default_cf_grid(int dim) {
    const auto d = static_cast<std::size_t>(dim);
    std::vector<double> grid;
    for (std::size_t axis = 0; axis < d; ++axis) {
        for (double v : axis_values()) {
            std::vector<double> t(d, 0.0);
            t[axis] = v;
            grid.insert(grid.end(), t.begin(), t.end());
        }
    }
    return grid;
}

double ecf_distance(std::span<const double> samples, int dim, const LimitLaw& law, std::span<const double> grid,
                    int workers) {
    const auto d = static_cast<std::size_t>(dim);
    const auto empirical = kernels::omp::empirical_cf(samples, dim, grid, workers);
    double worst = 0.0;
    for (std::size_t k = 0; k < empirical.size(); ++k)
        worst = std::max(worst, std::abs(empirical[k] - law.cf(grid.subspan(k * d, d))));
    return worst;
}

double factorization_discrepancy(std::span<const double> samples, int dim, std::span<const int> first,
                                 std::span<const int> second, int workers) {
    const auto d = static_cast<std::size_t>(dim);
    const auto axis = axis_values();
    const std::size_t g = axis.size();
    double worst = 0.0;
    for (int a : first) {
        for (int b : second) {
            // Rows: g points along a, g along b, then the g x g joint grid.
            std::vector<double> t;
            auto push = [&](double s, double u) {
                std::vector<double> row(d, 0.0);
                row[static_cast<std::size_t>(a)] = s;
                row[static_cast<std::size_t>(b)] += u;
                t.insert(t.end(), row.begin(), row.end());
            };
            for (double s : axis) push(s, 0.0);
            for (double u : axis) push(0.0, u);
            for (double s : axis)
                for (double u : axis) push(s, u);
            const auto phi = kernels::omp::empirical_cf(samples, dim, t, workers);
            for (std::size_t i = 0; i < g; ++i)
                for (std::size_t j = 0; j < g; ++j)
                    worst = std::max(worst, std::abs(phi[2 * g + i * g + j] - phi[i] * phi[g + j]));
        }
    }
    return worst;
}

LltProfile llt_profile(const MarginPmf& pmf) {
    const auto& sizes = pmf.sizes();
    const int m = sizes.groups();
    double cell_inverse = 1.0;
    for (auto n : sizes.sizes) cell_inverse *= std::sqrt(static_cast<double>(n)) / 2.0;
    LltProfile out;
    std::vector<double> x(static_cast<std::size_t>(m));
    double total = 0.0;
    pmf.for_each([&](const MarginVector& k, double p) {
        for (int l = 0; l < m; ++l) {
            const auto i = static_cast<std::size_t>(l);
            x[i] = static_cast<double>(k[i]) / std::sqrt(static_cast<double>(sizes[l]));
        }
        const double rescaled = p * cell_inverse;
        total += rescaled;
        out.sup_error = std::max(out.sup_error, std::abs(rescaled - standard_normal_density(x)));
    });
    out.recovered_mass = total / cell_inverse;
    return out;
}

double llt_sup_error(const DeFinettiModel& model, std::int64_t n, int workers) {
    return llt_profile(exact_margin_pmf(model, n, workers)).sup_error;
}

AlphaFit estimate_alpha(std::span<const std::pair<std::int64_t, double>> points) {
    if (points.size() < 2) throw DataError("estimate_alpha needs at least two points");
    std::set<std::int64_t> seen;
    std::vector<double> x, y;
    for (const auto& [n, margin] : points) {
        if (n <= 0) throw DataError("population sizes must be positive (got " + std::to_string(n) + ")");
        if (!(margin > 0.0) || !std::isfinite(margin))
            throw DataError("margins must be positive and finite (n = " + std::to_string(n) + ")");
        if (!seen.insert(n).second) throw DataError("duplicate population size " + std::to_string(n));
        x.push_back(std::log(static_cast<double>(n)));
        y.push_back(std::log(margin));
    }
    const auto fit = fit_line(x, y);
    return {-fit.slope, fit.intercept, fit.residual_variance, fit.r2};
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

VerificationReport make_report(std::string experiment_id, std::string statistic, double observed, double threshold) {
    VerificationReport r;
    r.experiment_id = std::move(experiment_id);
    r.statistic = std::move(statistic);
    r.observed = observed;
    r.threshold = threshold;
    r.pass = observed <= threshold;
    return r;
}

nlohmann::json to_json(const VerificationReport& r) {
    nlohmann::json j;
    j["experiment_id"] = r.experiment_id;
    j["statistic"] = r.statistic;
    if (std::isfinite(r.observed))
        j["observed"] = r.observed;
    else
        j["observed"] = format_double(r.observed);
    j["threshold"] = r.threshold;
    j["pass"] = r.pass;
    j["seed"] = r.seed;
    j["sample_count"] = r.sample_count;
    j["n_grid"] = r.n_grid;
    j["config_hash"] = r.config_hash;
    j["details"] = r.details;
    return j;
}

void write_jsonl(std::span<const VerificationReport> reports, std::ostream& out) {
    for (const auto& r : reports) out << to_json(r).dump() << '\n';
}

void write_summary_csv(std::span<const VerificationReport> reports, std::ostream& out) {
    out << "experiment_id,statistic,observed,threshold,pass\n";
    for (const auto& r : reports)
        out << r.experiment_id << ',' << r.statistic << ',' << format_double(r.observed) << ','
            << format_double(r.threshold) << ',' << (r.pass ? "true" : "false") << '\n';
}

VerificationReport correlation_decay_report(const DeFinettiModel& model, std::span<const std::int64_t> n_grid,
                                            double threshold) {
    if (n_grid.empty()) throw ConfigError("correlation decay needs a nonempty n grid");
    std::vector<std::vector<double>> values;
    for (auto n : n_grid) values.push_back(pair_correlation(model, n));
    const auto m = values.front().size();
    bool decreasing = true;
    for (std::size_t i = 1; i < values.size(); ++i) {
        for (std::size_t l = 0; l < m; ++l) {
            const double prev = values[i - 1][l], cur = values[i][l];
            const bool ok = cur < prev || (cur == 0.0 && prev == 0.0);
            decreasing = decreasing && ok;
        }
    }
    double terminal = 0.0;
    for (double v : values.back()) terminal = std::max(terminal, v);
    const double observed = decreasing ? terminal : std::numeric_limits<double>::infinity();
    auto report = make_report("correlation-decay", "terminal_pair_correlation", observed, threshold);
    report.n_grid.assign(n_grid.begin(), n_grid.end());
    report.details["pair_correlation"] = values;
    report.details["strictly_decreasing"] = decreasing;
    return report;
}

}  // namespace dfvote
