#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "dfvote/quadrature.hpp"
#include "dfvote/rng.hpp"

namespace dfvote {

using RealVector = std::vector<double>;

class BaseMeasure;

/// Finite sum of weighted Dirac masses.
struct PointMassMixture {
    std::vector<RealVector> locations;
    std::vector<double> weights;
};

/// Uniform law on the box [lower, upper].
struct UniformBox {
    RealVector lower;
    RealVector upper;
};

/// Normal law. Either positive definite, or positive semi-definite with a
/// diagonal covariance (zero variances collapse to atoms).
struct Gaussian {
    RealVector mean;
    Eigen::MatrixXd covariance;
    Eigen::MatrixXd factor;  // lower Cholesky factor (or sqrt of the diagonal)
    bool diagonal = false;
};

/// Independent product; the coordinates of the factors are concatenated.
struct Product {
    std::vector<BaseMeasure> factors;
};

struct Mixture {
    std::vector<BaseMeasure> components;
    std::vector<double> weights;
};

/// Immutable probability measure on R^M drawn from a closed algebra of
/// atoms, boxes, Gaussians, products and finite mixtures. Every member of
/// the algebra has a closed-form characteristic function, an exact (or
/// adaptively integrated) box mass and a direct sampler. Copies share
/// the underlying representation.
class BaseMeasure {
public:
    using Variant = std::variant<PointMassMixture, UniformBox, Gaussian, Product, Mixture>;

    static BaseMeasure point_mass(RealVector location);
    static BaseMeasure point_masses(std::vector<RealVector> locations, std::vector<double> weights);
    static BaseMeasure uniform_box(RealVector lower, RealVector upper);
    static BaseMeasure gaussian(RealVector mean, Eigen::MatrixXd covariance);
    static BaseMeasure product(std::vector<BaseMeasure> factors);
    static BaseMeasure mixture(std::vector<BaseMeasure> components, std::vector<double> weights);

    int dimension() const { return dim_; }
    const Variant& variant() const { return *data_; }

    /// True when the measure is a finite set of atoms (quadrature is exact).
    bool is_atomic() const;

    /// Reflection symmetry mu(A) = mu(-A), decided by the imaginary part of
    /// the characteristic function on a fixed probe grid.
    bool is_symmetric(double tol = 1e-12) const;

    void sample_into(CounterRng& rng, std::span<double> out) const;
    std::complex<double> characteristic_function(std::span<const double> t) const;

    /// Pushforward under x -> eps o x (componentwise scaling).
    BaseMeasure contracted(std::span<const double> eps) const;

    /// Probability of the closed box [lower, upper]; infinite bounds allowed.
    double mass_in_box(std::span<const double> lower, std::span<const double> upper) const;

    /// Marginal law of the listed coordinates (ascending, distinct).
    BaseMeasure marginal(std::span<const int> coords) const;

    /// Weighted point set for integrating against the measure. Continuous
    /// parts use `order` Gauss–Legendre nodes per coordinate and per piece,
    /// with coordinate intervals split at `breakpoints`.
    QuadratureRule quadrature_rule(int order, std::span<const double> breakpoints = {}) const;

    /// Human-readable one-line description.
    std::string describe() const;

private:
    BaseMeasure(Variant v, int dim);

    std::shared_ptr<const Variant> data_;
    int dim_ = 0;
};

/// `count` independent draws from stream (seed, 0).
std::vector<RealVector> sample(const BaseMeasure& measure, std::uint64_t seed, std::int64_t count);
std::complex<double> characteristic_function(const BaseMeasure& measure, std::span<const double> t);
BaseMeasure contract(const BaseMeasure& measure, std::span<const double> eps);
double mass_in_box(const BaseMeasure& measure, std::span<const double> lower,
                   std::span<const double> upper);

enum class BiasMapKind { tanh, clamp_identity };

/// Monotone odd map from a latent bias in R^M to vote biases in [-1, 1]^M.
class BiasMap {
public:
    constexpr explicit BiasMap(BiasMapKind kind = BiasMapKind::clamp_identity) : kind_(kind) {}

    BiasMapKind kind() const { return kind_; }
    double apply(double m) const;
    void apply(std::span<const double> m, std::span<double> out) const;
    /// Points where the map is not smooth (quadrature splits there).
    std::span<const double> breakpoints() const;
    std::string name() const;
    static BiasMap parse(const std::string& name);

    bool operator==(const BiasMap&) const = default;

private:
    BiasMapKind kind_;
};

RealVector apply_bias_map(const BiasMap& map, std::span<const double> m);

enum class Regime { fast, critical, subcritical };

std::string to_string(Regime r);
Regime parse_regime(const std::string& s);

/// eps_{n,l} = coefficient * n_l^(-exponent).
struct PowerLaw {
    double coefficient = 1.0;
    double exponent = 0.5;
};

/// Tabulated eps values keyed by group size, with a declared regime.
struct ExplicitSequence {
    std::map<std::int64_t, double> eps_by_size;
    Regime regime = Regime::fast;
};

struct GroupSchedule {
    std::variant<PowerLaw, ExplicitSequence> rule;
    std::optional<double> critical_constant;
};

/// Per-group contraction rates with regime classification. Power laws
/// classify analytically (exponent > 1/2 fast, = 1/2 critical with
/// h = coefficient, < 1/2 subcritical); explicit tables carry their tag.
class ContractionSchedule {
public:
    ContractionSchedule() = default;
    explicit ContractionSchedule(std::vector<GroupSchedule> groups);

    static ContractionSchedule power_law(std::vector<double> coefficients, std::vector<double> exponents);

    int group_count() const { return static_cast<int>(groups_.size()); }
    const std::vector<GroupSchedule>& groups() const { return groups_; }

    double eps(int group, std::int64_t group_size) const;
    RealVector eps(std::span<const std::int64_t> group_sizes) const;
    Regime regime(int group) const;
    /// h_l for critical groups (1 when no constant applies).
    double critical_constant(int group) const;

private:
    std::vector<GroupSchedule> groups_;
};

}  // namespace dfvote
