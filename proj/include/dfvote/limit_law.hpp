#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfvote/measure.hpp"
#include "dfvote/rng.hpp"

namespace dfvote {

class DeFinettiModel;

enum class LimitKind { standard_gaussian, convolution, base_measure, cluster_product };

std::string to_string(LimitKind kind);

/// Law of G o Z + D o Y with Z ~ N(0, I_M) and Y ~ mu independent, where
/// each coordinate is one of: Gaussian (G = 1, D = 0), critical
/// convolution (G = 1, D = h) or base measure (G = 0, D = 1).
class LimitLaw {
public:
    static LimitLaw standard_gaussian(int dim);
    /// N(0, I) convolved with mu scaled componentwise by h.
    static LimitLaw convolution(BaseMeasure base, std::vector<double> h);
    static LimitLaw base_measure(BaseMeasure base);
    /// Coordinates grouped by regime: fast ones are standard normal,
    /// critical ones carry h o Y plus noise, subcritical ones are Y.
    static LimitLaw cluster_product(BaseMeasure base, std::vector<Regime> regimes, std::vector<double> h);

    LimitKind kind() const { return kind_; }
    int dimension() const { return static_cast<int>(gauss_.size()); }
    /// Coordinate sets of the fast, critical and subcritical clusters.
    std::array<std::vector<int>, 3> clusters() const;
    const std::optional<BaseMeasure>& base() const { return base_; }
    /// Per-coordinate G and D.
    const std::vector<double>& gaussian_weights() const { return gauss_; }
    const std::vector<double>& base_scales() const { return scale_; }

    std::complex<double> cf(std::span<const double> t) const;
    LimitLaw marginal(int coord) const;
    void sample_into(CounterRng& rng, std::span<double> out) const;
    std::string describe() const;

private:
    LimitLaw() = default;

    LimitKind kind_ = LimitKind::standard_gaussian;
    std::vector<double> gauss_;
    std::vector<double> scale_;
    std::optional<BaseMeasure> base_;
};

/// Limit law of the normalized margins of a model.
LimitLaw limit_for(const DeFinettiModel& model);

struct CdfValue {
    double value = 0.0;
    /// Zero for exact 1-D evaluation; Monte Carlo standard error otherwise.
    double standard_error = 0.0;
};

inline constexpr std::int64_t kLimitCdfDraws = 1000000;

/// P(X <= x) coordinatewise. Exact in one dimension; in several dimensions
/// estimated from 10^6 draws of stream (seed, 0).
CdfValue limit_cdf(const LimitLaw& law, std::span<const double> x, std::uint64_t seed = 0);
double limit_cdf(const LimitLaw& law, double x);

std::complex<double> limit_cf(const LimitLaw& law, std::span<const double> t);

/// E exp(itX) for one vote with bias m: cos t + i m sin t.
std::complex<double> conditional_cf(double m, double t);

}  // namespace dfvote
