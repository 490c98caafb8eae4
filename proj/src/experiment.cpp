#include "dfvote/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/limit_law.hpp"
#include "dfvote/margin_sample.hpp"
#include "dfvote/voting_model.hpp"

namespace dfvote {
namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double threshold_or(const ExperimentConfig& c, const std::string& key, double fallback) {
    auto it = c.thresholds.find(key);
    return it == c.thresholds.end() ? fallback : it->second;
}

std::int64_t require_n(const ExperimentConfig& c) {
    if (!c.n) throw ConfigError("experiment '" + c.experiment + "' needs 'n'");
    return *c.n;
}

std::vector<std::int64_t> require_grid(const ExperimentConfig& c) {
    if (c.n_grid.empty()) throw ConfigError("experiment '" + c.experiment + "' needs 'n_grid'");
    return c.n_grid;
}

class Runner {
public:
    Runner(ExperimentConfig config, const RunOptions& options)
        : config_(std::move(config)), options_(options), hash_(config_hash(config_)) {}

    RunResult run() {
        const auto& kind = config_.experiment;
        if (kind == "simulate")
            simulate();
        else if (kind == "verify-clt")
            verify_clt();
        else if (kind == "verify-llt")
            verify_llt();
        else if (kind == "verify-cwm")
            verify_cwm();
        else if (kind == "estimate-alpha")
            estimate();
        else if (kind == "correlation-decay")
            decay();
        else
            throw ConfigError("unknown experiment '" + kind + "'");
        return finish();
    }

private:
    std::ostream* log() const { return options_.log; }

    void add(VerificationReport r) {
        r.config_hash = hash_;
        r.seed = config_.seed;
        if (log())
            *log() << (r.pass ? "PASS " : "FAIL ") << r.experiment_id << " " << r.statistic << " = " << r.observed
                   << " (threshold " << r.threshold << ")\n";
        reports_.push_back(std::move(r));
    }

    MarginSample sample(const DeFinettiModel& model, std::int64_t n) {
        auto s = sample_margins(model, n, config_.count, config_.seed, options_.workers);
        margins_ = s;
        return s;
    }

    void simulate() {
        const auto model = build_model(config_);
        const auto s = sample(model, require_n(config_));
        if (log()) *log() << "sampled " << s.count << " margin vectors at n = " << s.n << "\n";
    }

    void verify_clt() {
        const auto model = build_model(config_);
        const auto law = limit_for(model);
        const auto n = require_n(config_);
        const auto s = sample(model, n);
        const int m = s.groups();
        const double ks_limit = threshold_or(config_, "ks", ks_threshold(s.count));
        for (int l = 0; l < m; ++l) {
            const auto marginal = law.marginal(l);
            const double d = ks_statistic(s.group_column(l), [&](double x) { return limit_cdf(marginal, x); });
            auto r = make_report("verify-clt", "ks_group_" + std::to_string(l), d, ks_limit);
            r.details["limit"] = marginal.describe();
            r.details["gamma"] = s.gamma[static_cast<std::size_t>(l)];
            r.details["regime"] = s.regimes[static_cast<std::size_t>(l)];
            stamp(r, {n});
            add(std::move(r));
        }
        if (m < 2) return;
        const auto grid = default_cf_grid(m);
        const double ecf = ecf_distance(s.normalized, m, law, grid, options_.workers);
        auto r = make_report("verify-clt", "ecf_distance", ecf,
                             threshold_or(config_, "ecf", 5.0 / std::sqrt(static_cast<double>(s.count))));
        r.details["limit"] = law.describe();
        stamp(r, {n});
        add(std::move(r));
        const auto clusters = law.clusters();
        if (clusters[0].size() == static_cast<std::size_t>(m)) {
            double worst = 0.0;
            for (int a = 0; a < m; ++a)
                for (int b = a + 1; b < m; ++b)
                    worst = std::max(worst, std::abs(pearson_correlation(s.group_column(a), s.group_column(b))));
            auto c = make_report("verify-clt", "max_abs_cross_group_correlation", worst,
                                 threshold_or(config_, "correlation", 0.02));
            stamp(c, {n});
            add(std::move(c));
        }
        std::vector<int> rest = clusters[1];
        rest.insert(rest.end(), clusters[2].begin(), clusters[2].end());
        std::sort(rest.begin(), rest.end());
        if (!clusters[0].empty() && !rest.empty()) {
            const double f = factorization_discrepancy(s.normalized, m, clusters[0], rest, options_.workers);
            auto c = make_report("verify-clt", "cf_factorization_discrepancy", f,
                                 threshold_or(config_, "factorization", 0.03));
            c.details["first_cluster"] = clusters[0];
            c.details["other_clusters"] = rest;
            stamp(c, {n});
            add(std::move(c));
        }
    }

    void verify_llt() {
        const auto model = build_model(config_);
        auto grid = config_.n_grid;
        if (grid.empty()) grid.push_back(require_n(config_));
        std::vector<double> errors;
        bool decreasing = true;
        for (auto n : grid) {
            const auto profile = llt_profile(exact_margin_pmf(model, n, options_.workers));
            if (!errors.empty()) decreasing = decreasing && profile.sup_error < errors.back();
            errors.push_back(profile.sup_error);
            if (log()) *log() << "n = " << n << ": LLT sup error " << profile.sup_error << "\n";
        }
        const double observed = decreasing ? errors.back() : std::numeric_limits<double>::infinity();
        auto r = make_report("verify-llt", "terminal_llt_sup_error", observed, threshold_or(config_, "llt", 0.01));
        r.details["sup_error"] = errors;
        r.details["strictly_decreasing"] = decreasing;
        stamp(r, grid);
        add(std::move(r));
    }

    void verify_cwm() {
        const auto model = build_model(config_);
        const auto* cw = std::get_if<CurieWeissSequence>(&model.sequence());
        if (!cw) throw ConfigError("verify-cwm needs a curie_weiss sequence");
        const auto& spec = cw->coupling;
        std::vector<std::int64_t> small, all = config_.n_grid;
        for (auto n : all)
            if (n <= 16) small.push_back(n);
        for (auto n : small) {
            const double diff = representation_equivalence_check(spec, model.sizes(n), options_.workers);
            auto r = make_report("verify-cwm", "representation_discrepancy_n" + std::to_string(n), diff,
                                 threshold_or(config_, "equivalence", 1e-8));
            stamp(r, {n});
            add(std::move(r));
        }
        if (all.size() >= 2 && spec.high_temperature() && !spec.is_zero()) {
            const double delta = config_.delta.value_or(0.5);
            const auto profile = concentration_profile(spec, model.groups(), all, delta);
            bool decreasing = true;
            nlohmann::json tails = nlohmann::json::array();
            for (std::size_t i = 0; i < profile.points.size(); ++i) {
                const auto& p = profile.points[i];
                tails.push_back({{"n", p.n}, {"tail_mass", p.tail_mass}, {"underflow", p.underflow}});
                if (i > 0) decreasing = decreasing && p.tail_mass < profile.points[i - 1].tail_mass;
            }
            const double observed = decreasing ? 1.0 - profile.r2 : std::numeric_limits<double>::infinity();
            auto r = make_report("verify-cwm", "concentration_one_minus_r2", observed,
                                 1.0 - threshold_or(config_, "concentration_r2", 0.999));
            r.details["delta"] = delta;
            r.details["tails"] = tails;
            r.details["slope"] = profile.slope;
            r.details["r2"] = profile.r2;
            stamp(r, all);
            add(std::move(r));
        }
        if (config_.n) {
            const auto n = *config_.n;
            const auto s = sample(model, n);
            const auto exact_corr = pair_correlation(model, n);
            for (int l = 0; l < s.groups(); ++l) {
                const double nl = static_cast<double>(s.sizes[l]);
                const double expected = 1.0 + (nl - 1.0) * exact_corr[static_cast<std::size_t>(l)];
                double sum = 0.0, sq = 0.0;
                for (std::int64_t i = 0; i < s.count; ++i) {
                    const double v = s.normalized_at(i, l) * s.normalized_at(i, l);
                    sum += v;
                    sq += v * v;
                }
                const double c = static_cast<double>(s.count);
                const double mean = sum / c;
                const double se = std::sqrt(std::max(0.0, sq / c - mean * mean) / c);
                const double z = se > 0.0 ? std::abs(mean - expected) / se : std::abs(mean - expected);
                auto r = make_report("verify-cwm", "variance_z_group_" + std::to_string(l), z,
                                     threshold_or(config_, "variance_z", 3.0));
                r.details["sample_second_moment"] = mean;
                r.details["exact_second_moment"] = expected;
                stamp(r, {n});
                add(std::move(r));
            }
        }
    }

    void estimate() {
        std::vector<std::pair<std::int64_t, double>> points;
        nlohmann::json details;
        const std::string input = options_.input.value_or(config_.input);
        if (!input.empty()) {
            const auto ingest = ingest_margins(input);
            for (const auto& w : ingest.warnings)
                if (log()) *log() << "warning: " << w << "\n";
            points = ingest.points;
            details["input"] = input;
        } else {
            const auto model = build_model(config_);
            if (model.dimension() != 1) throw ConfigError("estimate-alpha from a model needs a single group");
            const auto grid = require_grid(config_);
            nlohmann::json se = nlohmann::json::array();
            for (std::size_t i = 0; i < grid.size(); ++i) {
                const auto est = expected_abs_margin(model, grid[i], EstimateMode::monte_carlo, config_.count,
                                                     mix_seed(config_.seed, i), options_.workers);
                points.emplace_back(grid[i], est.values[0]);
                se.push_back(est.standard_errors[0]);
            }
            details["standard_errors"] = se;
        }
        const auto fit = estimate_alpha(points);
        char line[64];
        std::snprintf(line, sizeof line, "alpha = %.4f", fit.alpha);
        if (log()) *log() << line << "\n";
        details["alpha"] = fit.alpha;
        details["intercept"] = fit.intercept;
        details["residual_variance"] = fit.residual_variance;
        details["r2"] = fit.r2;
        nlohmann::json pts = nlohmann::json::array();
        std::vector<std::int64_t> grid;
        for (const auto& [n, v] : points) {
            pts.push_back({n, v});
            grid.push_back(n);
        }
        details["points"] = pts;
        const bool ranged = config_.thresholds.count("alpha_min") || config_.thresholds.count("alpha_max");
        const double lo = threshold_or(config_, "alpha_min", -std::numeric_limits<double>::infinity());
        const double hi = threshold_or(config_, "alpha_max", std::numeric_limits<double>::infinity());
        const double outside = std::max({0.0, lo - fit.alpha, fit.alpha - hi});
        auto r = make_report("estimate-alpha", ranged ? "alpha_outside_range" : "alpha", ranged ? outside : fit.alpha,
                             ranged ? 0.0 : std::numeric_limits<double>::infinity());
        r.details = details;
        stamp(r, grid);
        add(std::move(r));
    }

    void decay() {
        const auto model = build_model(config_);
        const auto grid = require_grid(config_);
        auto r = correlation_decay_report(model, grid, threshold_or(config_, "correlation_decay", 1e-3));
        r.sample_count = 0;
        add(std::move(r));
    }

    void stamp(VerificationReport& r, std::vector<std::int64_t> grid) const {
        r.n_grid = std::move(grid);
        r.sample_count = margins_ ? margins_->count : 0;
    }

    RunResult finish() {
        namespace fs = std::filesystem;
        RunResult result;
        result.config_hash = hash_;
        result.output_dir = options_.output_dir.value_or(config_.output_dir);
        fs::create_directories(result.output_dir);
        const fs::path dir(result.output_dir);
        nlohmann::json artifacts = nlohmann::json::array();
        nlohmann::json manifest;
        manifest["config_hash"] = hash_;
        manifest["seed"] = config_.seed;
        manifest["tool_version"] = kToolVersion;
        manifest["experiment"] = config_.experiment;
        manifest["config"] = to_json(config_);
        if (margins_) {
            std::ofstream out(dir / "margins.csv", std::ios::binary);
            write_margin_csv(*margins_, out);
            artifacts.push_back("margins.csv");
            manifest["margins"] = margin_manifest(*margins_, hash_);
        }
        {
            std::ofstream out(dir / "reports.jsonl", std::ios::binary);
            write_jsonl(reports_, out);
            artifacts.push_back("reports.jsonl");
        }
        {
            std::ofstream out(dir / "summary.csv", std::ios::binary);
            write_summary_csv(reports_, out);
            artifacts.push_back("summary.csv");
        }
        manifest["artifacts"] = artifacts;
        std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
        result.reports = reports_;
        result.exit_code = std::all_of(reports_.begin(), reports_.end(), [](const auto& r) { return r.pass; }) ? 0 : 1;
        return result;
    }

    ExperimentConfig config_;
    const RunOptions& options_;
    std::string hash_;
    std::vector<VerificationReport> reports_;
    std::optional<MarginSample> margins_;
};

}  // namespace

MarginIngest ingest_margins_text(const std::string& text) {
    MarginIngest out;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    bool per_capita = false;
    bool header = false;
    std::vector<int> bad;
    std::set<std::pair<std::int64_t, double>> seen;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty()) continue;
        const auto fields = split_csv(t);
        if (!header) {
            if (fields.size() == 2 && fields[0] == "population" && fields[1] == "abs_margin") {
                per_capita = false;
            } else if (fields.size() == 2 && fields[0] == "population" && fields[1] == "margin_per_capita") {
                per_capita = true;
            } else {
                throw DataError("line " + std::to_string(lineno) +
                                ": expected header 'population,abs_margin' or 'population,margin_per_capita'");
            }
            header = true;
            continue;
        }
        std::int64_t population = 0;
        double value = 0.0;
        bool ok = fields.size() == 2;
        if (ok) {
            try {
                std::size_t used = 0;
                population = std::stoll(fields[0], &used);
                ok = used == fields[0].size();
                value = std::stod(fields[1], &used);
                ok = ok && used == fields[1].size() && std::isfinite(value);
            } catch (const std::exception&) {
                ok = false;
            }
        }
        if (!ok) {
            bad.push_back(lineno);
            continue;
        }
        if (population <= 0) {
            out.warnings.push_back("line " + std::to_string(lineno) + ": nonpositive population, row rejected");
            continue;
        }
        const double margin = per_capita ? value : value / static_cast<double>(population);
        if (!seen.emplace(population, margin).second) {
            out.warnings.push_back("line " + std::to_string(lineno) + ": duplicate row ignored");
            continue;
        }
        out.points.emplace_back(population, margin);
    }
    if (!bad.empty()) {
        std::string msg = "malformed rows at line";
        msg += bad.size() > 1 ? "s " : " ";
        for (std::size_t i = 0; i < bad.size(); ++i) msg += (i ? ", " : "") + std::to_string(bad[i]);
        throw DataError(msg);
    }
    if (!header) throw DataError("margin file is empty");
    if (out.points.empty()) throw DataError("margin file has no data rows");
    return out;
}

MarginIngest ingest_margins(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open margin file '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return ingest_margins_text(text);
}

RunResult run_experiment(ExperimentConfig config, const RunOptions& options) {
    if (options.seed) config.seed = *options.seed;
    if (options.input) config.input = *options.input;
    return Runner(std::move(config), options).run();
}

}  // namespace dfvote
