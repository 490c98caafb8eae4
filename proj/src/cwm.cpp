#include "dfvote/cwm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/kernels.hpp"
#include "dfvote/measure.hpp"
#include "dfvote/mixing.hpp"
#include "dfvote/special.hpp"

namespace dfvote {
namespace {

constexpr double kBoxSigmas = 12.0;
constexpr std::int64_t kGibbsMaxVoters = 20;

bool is_positive_definite(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const auto ev = es.eigenvalues();
    return ev.minCoeff() > 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    return es.eigenvalues().minCoeff();
}

void check_groups(const CouplingSpec& spec, const GroupSizes& sizes) {
    if (spec.groups() != sizes.groups()) {
        std::ostringstream os;
        os << "coupling matrix is " << spec.groups() << "x" << spec.groups() << " but there are " << sizes.groups()
           << " groups";
        throw ConfigError(os.str());
    }
}

// sqrt(a) J^-1 sqrt(a)
Eigen::MatrixXd quadratic_part(const CouplingSpec& spec, const GroupSizes& sizes) {
    check_groups(spec, sizes);
    if (!spec.positive_definite())
        throw ConfigError("the de Finetti density needs a positive definite coupling matrix");
    const auto alpha = sizes.proportions();
    Eigen::VectorXd s(spec.groups());
    for (int l = 0; l < spec.groups(); ++l) s(l) = std::sqrt(alpha[static_cast<std::size_t>(l)]);
    const Eigen::MatrixXd inv = spec.coupling().inverse();
    return s.asDiagonal() * inv * s.asDiagonal();
}

double free_energy_with(const Eigen::MatrixXd& quad, const std::vector<double>& alpha, std::span<const double> x) {
    const auto m = alpha.size();
    double q = 0.0;
    double c = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < m; ++j)
            row += quad(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * x[j];
        q += x[i] * row;
        c += alpha[i] * log_cosh(x[i]);
    }
    return 0.5 * q - c;
}

}  // namespace

CouplingSpec CouplingSpec::single_group(double beta) {
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("beta must be a finite nonnegative number");
    Eigen::MatrixXd j(1, 1);
    j(0, 0) = beta;
    return CouplingSpec(std::move(j));
}

CouplingSpec CouplingSpec::from_matrix(Eigen::MatrixXd coupling) {
    if (coupling.rows() == 0 || coupling.rows() != coupling.cols())
        throw ConfigError("coupling matrix must be square and nonempty");
    if (!coupling.allFinite()) throw ConfigError("coupling matrix has non-finite entries");
    if ((coupling - coupling.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw ConfigError("coupling matrix must be symmetric");
    if (min_eigenvalue(coupling) < -1e-12) throw ConfigError("coupling matrix must be positive semi-definite");
    return CouplingSpec(std::move(coupling));
}

bool CouplingSpec::is_zero() const { return j_.cwiseAbs().maxCoeff() == 0.0; }

bool CouplingSpec::positive_definite() const { return is_positive_definite(j_); }

bool CouplingSpec::high_temperature() const {
    const Eigen::MatrixXd gap = Eigen::MatrixXd::Identity(j_.rows(), j_.cols()) - j_;
    return is_positive_definite(gap);
}

double single_group_free_energy(double beta, double m) {
    const double a = std::atanh(m);
    return 0.5 * (a * a / beta + std::log1p(-m * m));
}

double free_energy(const CouplingSpec& spec, const GroupSizes& sizes, std::span<const double> x) {
    return free_energy_with(quadratic_part(spec, sizes), sizes.proportions(), x);
}

double definetti_density(const CouplingSpec& spec, const GroupSizes& sizes, std::span<const double> x) {
    return std::exp(-static_cast<double>(sizes.total()) * free_energy(spec, sizes, x));
}

MarginPmf gibbs_pmf(const CouplingSpec& spec, const GroupSizes& sizes) {
    check_groups(spec, sizes);
    if (sizes.total() > kGibbsMaxVoters) {
        std::ostringstream os;
        os << "Gibbs enumeration is limited to " << kGibbsMaxVoters << " voters (got " << sizes.total() << ")";
        throw ResourceError(os.str());
    }
    MarginPmf pmf(sizes);
    const auto& j = spec.coupling();
    const int m = sizes.groups();
    std::vector<double> logw(pmf.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t f = 0; f < pmf.size(); ++f) {
        const auto k = pmf.margin(f);
        double lw = 0.0;
        for (int a = 0; a < m; ++a) {
            const auto ia = static_cast<std::size_t>(a);
            lw += log_binomial_coefficient(sizes[a], (sizes[a] + k[ia]) / 2);
            for (int b = 0; b < m; ++b) {
                const auto ib = static_cast<std::size_t>(b);
                lw += 0.5 * j(a, b) * static_cast<double>(k[ia]) * static_cast<double>(k[ib]) /
                      std::sqrt(static_cast<double>(sizes[a]) * static_cast<double>(sizes[b]));
            }
        }
        logw[f] = lw;
        top = std::max(top, lw);
    }
    double z = 0.0;
    for (double lw : logw) z += std::exp(lw - top);
    auto out = pmf.values();
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = std::exp(logw[f] - top) / z;
    return pmf;
}

std::vector<double> gibbs_pair_correlation(const CouplingSpec& spec, const GroupSizes& sizes) {
    const auto pmf = gibbs_pmf(spec, sizes);
    std::vector<double> second(static_cast<std::size_t>(sizes.groups()), 0.0);
    pmf.for_each([&](const MarginVector& k, double p) {
        for (std::size_t l = 0; l < k.size(); ++l) second[l] += p * static_cast<double>(k[l] * k[l]);
    });
    std::vector<double> out;
    for (int l = 0; l < sizes.groups(); ++l) {
        const double n = static_cast<double>(sizes[l]);
        out.push_back((second[static_cast<std::size_t>(l)] - n) / (n * (n - 1.0)));
    }
    return out;
}

CwmDeFinettiMeasure::CwmDeFinettiMeasure(CouplingSpec spec, GroupSizes sizes)
    : spec_(std::move(spec)), sizes_(std::move(sizes)), z_cache_(std::make_shared<double>(0.0)) {
    check_groups(spec_, sizes_);
    n_ = static_cast<double>(sizes_.total());
    alpha_ = sizes_.proportions();
    const int m = spec_.groups();
    if (spec_.is_zero()) {
        degenerate_ = true;
        half_width_.assign(static_cast<std::size_t>(m), 0.0);
        precision_ = Eigen::MatrixXd::Zero(m, m);
        return;
    }
    quad_ = quadratic_part(spec_, sizes_);
    Eigen::MatrixXd diag_alpha = Eigen::MatrixXd::Zero(m, m);
    for (int l = 0; l < m; ++l) diag_alpha(l, l) = alpha_[static_cast<std::size_t>(l)];
    precision_ = n_ * (quad_ - diag_alpha);
    if (spec_.high_temperature() && is_positive_definite(precision_)) {
        const Eigen::MatrixXd cov = precision_.inverse();
        for (int l = 0; l < m; ++l) half_width_.push_back(kBoxSigmas * std::sqrt(cov(l, l)));
    } else {
        // ln cosh x <= |x| bounds the density by a Gaussian centred at
        // distance |a| / lambda_min from the origin.
        const double lmin = min_eigenvalue(quad_);
        double anorm = 0.0;
        for (double a : alpha_) anorm += a * a;
        anorm = std::sqrt(anorm);
        const double r = 2.0 * anorm / lmin + kBoxSigmas / std::sqrt(n_ * lmin);
        half_width_.assign(static_cast<std::size_t>(m), r);
    }
}

double CwmDeFinettiMeasure::free_energy(std::span<const double> x) const {
    if (degenerate_) throw ConfigError("the de Finetti measure of a zero coupling is a point mass");
    return free_energy_with(quad_, alpha_, x);
}

double CwmDeFinettiMeasure::log_density(std::span<const double> x) const { return -n_ * free_energy(x); }

QuadratureRule CwmDeFinettiMeasure::quadrature_rule(int order) const {
    const int m = dimension();
    if (degenerate_) {
        QuadratureRule atom;
        atom.dim = m;
        atom.exact = true;
        std::vector<double> origin(static_cast<std::size_t>(m), 0.0);
        atom.add(origin, 1.0);
        return atom;
    }
    std::vector<QuadratureRule> axes;
    for (double r : half_width_) axes.push_back(interval_rule(-r, r, order, {}));
    auto rule = tensor_product(axes);
    rule.exact = false;
    std::vector<double> logs(rule.size());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < rule.size(); ++q) {
        logs[q] = log_density(rule.point(q));
        top = std::max(top, logs[q]);
    }
    double total = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
        rule.weights[q] *= std::exp(logs[q] - top);
        total += rule.weights[q];
    }
    for (auto& w : rule.weights) w /= total;
    return rule;
}

double CwmDeFinettiMeasure::normalizer() const {
    if (degenerate_) return 1.0;
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    if (*z_cache_ == 0.0) {
        std::vector<double> lo, hi;
        for (double r : half_width_) {
            lo.push_back(-r);
            hi.push_back(r);
        }
        *z_cache_ = integrate_box_adaptive([&](std::span<const double> x) { return std::exp(log_density(x)); }, lo, hi);
    }
    return *z_cache_;
}

double CwmDeFinettiMeasure::mass_in_box(std::span<const double> lower, std::span<const double> upper) const {
    const auto m = static_cast<std::size_t>(dimension());
    if (degenerate_) {
        for (std::size_t i = 0; i < m; ++i)
            if (lower[i] > 0.0 || upper[i] < 0.0) return 0.0;
        return 1.0;
    }
    std::vector<double> lo(m), hi(m);
    for (std::size_t i = 0; i < m; ++i) {
        lo[i] = std::max(lower[i], -half_width_[i]);
        hi[i] = std::min(upper[i], half_width_[i]);
        if (lo[i] >= hi[i]) return 0.0;
    }
    const double part =
        integrate_box_adaptive([&](std::span<const double> x) { return std::exp(log_density(x)); }, lo, hi);
    return std::clamp(part / normalizer(), 0.0, 1.0);
}

CompactCwmDensity::CompactCwmDensity(CwmDeFinettiMeasure measure)
    : measure_(std::move(measure)), z_cache_(std::make_shared<double>(0.0)) {
    if (measure_.degenerate()) throw ConfigError("the compact representation needs a positive definite coupling");
}

double CompactCwmDensity::unnormalized(std::span<const double> t) const {
    std::vector<double> x(t.size());
    double jac = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (std::abs(t[i]) >= 1.0) return 0.0;
        x[i] = std::atanh(t[i]);
        jac -= std::log1p(-t[i] * t[i]);
    }
    return std::exp(measure_.log_density(x) + jac);
}

double CompactCwmDensity::normalizer() const {
    static std::mutex mutex;
    std::lock_guard lock(mutex);
    if (*z_cache_ == 0.0) {
        const auto m = static_cast<std::size_t>(measure_.dimension());
        std::vector<double> lo(m, -1.0), hi(m, 1.0);
        *z_cache_ = integrate_box_adaptive([&](std::span<const double> t) { return unnormalized(t); }, lo, hi);
    }
    return *z_cache_;
}

double CompactCwmDensity::mass_in_box(std::span<const double> lower, std::span<const double> upper) const {
    const auto m = static_cast<std::size_t>(measure_.dimension());
    std::vector<double> lo(m), hi(m);
    for (std::size_t i = 0; i < m; ++i) {
        lo[i] = std::max(lower[i], -1.0);
        hi[i] = std::min(upper[i], 1.0);
        if (lo[i] >= hi[i]) return 0.0;
    }
    const double part = integrate_box_adaptive([&](std::span<const double> t) { return unnormalized(t); }, lo, hi);
    return std::clamp(part / normalizer(), 0.0, 1.0);
}

double CompactCwmDensity::tail_mass(double delta) const {
    if (delta >= 1.0) return 0.0;
    const auto m = static_cast<std::size_t>(measure_.dimension());
    double total = 0.0;
    // Complement of the cube split by the first coordinate leaving [-delta, delta].
    for (std::size_t l = 0; l < m; ++l) {
        std::vector<double> lo(m, -1.0), hi(m, 1.0);
        for (std::size_t i = 0; i < l; ++i) {
            lo[i] = -delta;
            hi[i] = delta;
        }
        for (int side : {-1, 1}) {
            lo[l] = side < 0 ? -1.0 : delta;
            hi[l] = side < 0 ? -delta : 1.0;
            total += integrate_box_adaptive([&](std::span<const double> t) { return unnormalized(t); }, lo, hi);
        }
    }
    return total / normalizer();
}

double representation_equivalence_check(const CouplingSpec& spec, const GroupSizes& sizes, int workers) {
    const auto gibbs = gibbs_pmf(spec, sizes);
    const CwmDeFinettiMeasure measure(spec, sizes);
    const auto mixed = integrate_margin_pmf([&](int order) { return measure.quadrature_rule(order); },
                                            BiasMap(BiasMapKind::tanh), sizes, workers);
    return gibbs.max_abs_difference(mixed);
}

ConcentrationProfile concentration_profile(const CouplingSpec& spec, const GroupStructure& groups,
                                           std::span<const std::int64_t> n_grid, double delta) {
    if (!(delta > 0.0)) throw ConfigError("concentration delta must be positive");
    if (!spec.high_temperature()) throw ConfigError("concentration profile requires I - J positive definite");
    ConcentrationProfile profile;
    std::vector<double> xs, ys;
    for (auto n : n_grid) {
        ConcentrationPoint point;
        point.n = n;
        const CompactCwmDensity density(CwmDeFinettiMeasure(spec, groups.resolve(n)));
        const double tail = density.tail_mass(delta);
        if (tail < 1e-300) {
            point.tail_mass = 0.0;
            point.underflow = delta < 1.0;
        } else {
            point.tail_mass = tail;
            xs.push_back(static_cast<double>(n));
            ys.push_back(std::log(tail));
        }
        profile.points.push_back(point);
    }
    if (xs.size() >= 2) {
        const auto fit = fit_line(xs, ys);
        profile.slope = fit.slope;
        profile.intercept = fit.intercept;
        profile.r2 = fit.r2;
    }
    return profile;
}

void sample_cwm_latent(const CwmDeFinettiMeasure& measure, CounterRng& rng, std::int64_t count,
                       std::span<double> out) {
    const int m = measure.dimension();
    const auto um = static_cast<std::size_t>(m);
    if (measure.degenerate()) {
        std::fill(out.begin(), out.end(), 0.0);
        return;
    }
    const Eigen::MatrixXd& h = measure.envelope_precision();
    std::normal_distribution<double> normal(0.0, 1.0);
    if (m == 1) {
        const double sd = 1.0 / std::sqrt(h(0, 0));
        std::int64_t attempts = 0, accepted = 0;
        while (accepted < count) {
            const double x = sd * normal(rng);
            const double log_ratio = measure.log_density(std::span<const double>(&x, 1)) + 0.5 * h(0, 0) * x * x;
            ++attempts;
            if (std::log(rng.uniform()) < log_ratio) out[static_cast<std::size_t>(accepted++)] = x;
            if (attempts >= 10000 && accepted * 100 < attempts) {
                std::ostringstream os;
                os << "Gaussian envelope acceptance rate " << static_cast<double>(accepted) / static_cast<double>(attempts)
                   << " is below 1%; review the coupling (beta close to 1 or small n)";
                throw ConfigError(os.str());
            }
        }
        return;
    }
    const Eigen::MatrixXd step_cov = (2.38 * 2.38 / m) * h.inverse();
    const Eigen::MatrixXd step = step_cov.llt().matrixL();
    Eigen::VectorXd x = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd y(m), z(m);
    double lx = measure.log_density(std::span<const double>(x.data(), um));
    auto advance = [&] {
        for (int i = 0; i < m; ++i) z(i) = normal(rng);
        y = x + step * z;
        const double ly = measure.log_density(std::span<const double>(y.data(), um));
        if (std::log(rng.uniform()) < ly - lx) {
            x = y;
            lx = ly;
        }
    };
    for (int s = 0; s < kMetropolisBurnIn; ++s) advance();
    for (std::int64_t i = 0; i < count; ++i) {
        for (int s = 0; s < kMetropolisThinning; ++s) advance();
        for (std::size_t l = 0; l < um; ++l) out[static_cast<std::size_t>(i) * um + l] = x(static_cast<Eigen::Index>(l));
    }
}

MarginSample sample_cwm_margins(const CouplingSpec& spec, const GroupSizes& sizes, std::int64_t count,
                                std::uint64_t seed, int workers) {
    if (count < 1) throw ConfigError("sample count must be at least 1");
    if (!spec.high_temperature())
        throw ConfigError("the Curie-Weiss sampler is only validated for I - J positive definite");
    const CwmDeFinettiMeasure measure(spec, sizes);
    const auto m = static_cast<std::size_t>(sizes.groups());
    kernels::SamplingPlan plan;
    plan.sizes = sizes;
    plan.count = count;
    plan.seed = seed;
    plan.draw_biases = [&measure, m](CounterRng& rng, std::span<double> biases) {
        sample_cwm_latent(measure, rng, static_cast<std::int64_t>(biases.size() / m), biases);
        for (auto& b : biases) b = std::tanh(b);
    };
    std::vector<std::int64_t> raw(static_cast<std::size_t>(count) * m);
    kernels::omp::sample_margins(plan, raw, workers);
    std::vector<double> gamma;
    for (auto n : sizes.sizes) gamma.push_back(std::sqrt(static_cast<double>(n)));
    return make_margin_sample(sizes, count, seed, std::move(gamma), std::vector<std::string>(m, "curie-weiss"),
                              std::move(raw));
}

}  // namespace dfvote
