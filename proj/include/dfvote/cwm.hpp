#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dfvote/groups.hpp"
#include "dfvote/margin_pmf.hpp"
#include "dfvote/margin_sample.hpp"
#include "dfvote/quadrature.hpp"
#include "dfvote/rng.hpp"

namespace dfvote {

/// Coupling matrix J of the multi-group Curie–Weiss model.
class CouplingSpec {
public:
    /// J = [beta].
    static CouplingSpec single_group(double beta);
    /// J must be symmetric positive semi-definite.
    static CouplingSpec from_matrix(Eigen::MatrixXd coupling);

    const Eigen::MatrixXd& coupling() const { return j_; }
    int groups() const { return static_cast<int>(j_.rows()); }
    bool is_zero() const;
    bool positive_definite() const;
    /// I - J positive definite.
    bool high_temperature() const;

private:
    explicit CouplingSpec(Eigen::MatrixXd j) : j_(std::move(j)) {}
    Eigen::MatrixXd j_;
};

/// F(m) = ((artanh m)^2 / beta + ln(1 - m^2)) / 2 for |m| < 1.
double single_group_free_energy(double beta, double m);

/// F_{n,J}(x) = x' sqrt(a) J^-1 sqrt(a) x / 2 - sum_l a_l ln cosh x_l with a_l = n_l / n.
double free_energy(const CouplingSpec& spec, const GroupSizes& sizes, std::span<const double> x);

/// Unnormalized de Finetti density exp(-n F_{n,J}(x)).
double definetti_density(const CouplingSpec& spec, const GroupSizes& sizes, std::span<const double> x);

/// Margin pmf of the Gibbs measure by exact summation over margin classes.
/// Total population at most 20.
MarginPmf gibbs_pmf(const CouplingSpec& spec, const GroupSizes& sizes);

/// E X_{l1} X_{l2} per group from the Gibbs margin pmf.
std::vector<double> gibbs_pair_correlation(const CouplingSpec& spec, const GroupSizes& sizes);

/// The de Finetti measure exp(-n F_{n,J}(x)) dx / Z on R^M for one set of
/// group sizes. J = 0 gives the point mass at the origin.
class CwmDeFinettiMeasure {
public:
    CwmDeFinettiMeasure(CouplingSpec spec, GroupSizes sizes);

    const CouplingSpec& spec() const { return spec_; }
    const GroupSizes& sizes() const { return sizes_; }
    int dimension() const { return spec_.groups(); }
    bool degenerate() const { return degenerate_; }

    double free_energy(std::span<const double> x) const;
    double log_density(std::span<const double> x) const;

    /// Integration box [-R, R] per coordinate.
    const std::vector<double>& half_widths() const { return half_width_; }
    /// n sqrt(a) (J^-1 - I) sqrt(a): the quadratic lower bound of n F_{n,J}.
    const Eigen::MatrixXd& envelope_precision() const { return precision_; }

    /// Tensor Gauss–Legendre rule on the box with weights proportional to
    /// the density, normalized to total weight 1.
    QuadratureRule quadrature_rule(int order) const;

    /// Z = integral of exp(-n F) over the box (cached).
    double normalizer() const;
    double mass_in_box(std::span<const double> lower, std::span<const double> upper) const;

private:
    CouplingSpec spec_;
    GroupSizes sizes_;
    bool degenerate_ = false;
    double n_ = 0.0;
    std::vector<double> alpha_;
    Eigen::MatrixXd quad_;       // sqrt(a) J^-1 sqrt(a)
    Eigen::MatrixXd precision_;
    std::vector<double> half_width_;
    std::shared_ptr<double> z_cache_;
};

/// The same measure after t = tanh x, as a density on (-1, 1)^M:
/// exp(-n F_{n,J}(artanh t)) prod 1/(1 - t_l^2) / Z. Zero on the boundary.
class CompactCwmDensity {
public:
    explicit CompactCwmDensity(CwmDeFinettiMeasure measure);

    double unnormalized(std::span<const double> t) const;
    double operator()(std::span<const double> t) const { return unnormalized(t) / normalizer(); }
    double normalizer() const;
    double mass_in_box(std::span<const double> lower, std::span<const double> upper) const;
    /// Mass outside [-delta, delta]^M, integrated directly.
    double tail_mass(double delta) const;

private:
    CwmDeFinettiMeasure measure_;
    std::shared_ptr<double> z_cache_;
};

/// Largest |gibbs_pmf - de Finetti quadrature pmf| over the lattice.
double representation_equivalence_check(const CouplingSpec& spec, const GroupSizes& sizes, int workers = 0);

struct ConcentrationPoint {
    std::int64_t n = 0;
    double tail_mass = 0.0;
    bool underflow = false;
};

struct ConcentrationProfile {
    std::vector<ConcentrationPoint> points;
    /// Fit of ln(tail mass) against n over the points without underflow.
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

ConcentrationProfile concentration_profile(const CouplingSpec& spec, const GroupStructure& groups,
                                           std::span<const std::int64_t> n_grid, double delta);

/// Two-stage sampler: x from the de Finetti density (rejection for M = 1,
/// random-walk Metropolis for M >= 2), margins binomial given tanh x.
/// Normalized by sqrt(n_l). Requires the high-temperature regime.
MarginSample sample_cwm_margins(const CouplingSpec& spec, const GroupSizes& sizes, std::int64_t count,
                                std::uint64_t seed, int workers = 0);

/// Draws `count` points of the de Finetti measure into out (count x M),
/// advancing rng. Exposed for the voting-model sampler.
void sample_cwm_latent(const CwmDeFinettiMeasure& measure, CounterRng& rng, std::int64_t count,
                       std::span<double> out);

inline constexpr int kMetropolisBurnIn = 10000;
inline constexpr int kMetropolisThinning = 10;

}  // namespace dfvote
