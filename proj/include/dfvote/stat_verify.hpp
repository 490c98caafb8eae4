#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dfvote/limit_law.hpp"
#include "dfvote/margin_pmf.hpp"
#include "dfvote/voting_model.hpp"
#include "json.hpp"

namespace dfvote {

/// sup_x |F_N(x) - F(x)| over the sorted sample, both one-sided gaps.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

/// 99.9% quantile of the Kolmogorov distribution.
inline constexpr double kKolmogorov999 = 1.9495;

/// safety * 1.9495 / sqrt(count).
double ks_threshold(std::int64_t count, double safety = 1.5);

/// 21 equispaced points in [-3, 3] on each coordinate axis, row-major
/// (points x dim).
std::vector<double> default_cf_grid(int dim);

/// max over the grid of |empirical CF - law CF|. samples are row-major.
double ecf_distance(std::span<const double> samples, int dim, const LimitLaw& law, std::span<const double> grid,
                    int workers = 0);

/// max |phi(s e_a + u e_b) - phi(s e_a) phi(u e_b)| of the empirical CF over
/// a in `first`, b in `second` and s, u on the 21-point axis grid.
double factorization_discrepancy(std::span<const double> samples, int dim, std::span<const int> first,
                                 std::span<const int> second, int workers = 0);

struct LltProfile {
    /// sup over the lattice of |rescaled point probability - phi(x)|.
    double sup_error = 0.0;
    /// Sum of rescaled values times the cell volume (should be 1).
    double recovered_mass = 0.0;
};

LltProfile llt_profile(const MarginPmf& pmf);
double llt_sup_error(const DeFinettiModel& model, std::int64_t n, int workers = 0);

struct AlphaFit {
    double alpha = 0.0;
    double intercept = 0.0;
    double residual_variance = 0.0;
    double r2 = 1.0;
};

/// Least-squares slope of ln(margin) on ln(n), returned as alpha = -slope.
/// Needs at least two points with distinct n and positive margins.
AlphaFit estimate_alpha(std::span<const std::pair<std::int64_t, double>> points);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct VerificationReport {
    std::string experiment_id;
    std::string statistic;
    double observed = 0.0;
    double threshold = 0.0;
    bool pass = false;
    std::uint64_t seed = 0;
    std::int64_t sample_count = 0;
    std::vector<std::int64_t> n_grid;
    std::string config_hash;
    nlohmann::json details = nlohmann::json::object();
};

/// Sets pass = observed <= threshold.
VerificationReport make_report(std::string experiment_id, std::string statistic, double observed, double threshold);

nlohmann::json to_json(const VerificationReport& report);
void write_jsonl(std::span<const VerificationReport> reports, std::ostream& out);
/// experiment_id,statistic,observed,threshold,pass
void write_summary_csv(std::span<const VerificationReport> reports, std::ostream& out);

/// Pair correlations along the grid must decrease strictly (or all vanish)
/// and end at or below the threshold. observed is the largest terminal value
/// when the decrease holds and +inf otherwise.
VerificationReport correlation_decay_report(const DeFinettiModel& model, std::span<const std::int64_t> n_grid,
                                            double threshold = 1e-3);

}  // namespace dfvote
