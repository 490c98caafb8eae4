#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace dfvote {

/// Gauss–Legendre nodes and weights on [-1, 1].
struct GaussLegendreTable {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached, thread-safe table lookup. Tables are built once per order by
/// Newton iteration on the Legendre recurrence.
std::shared_ptr<const GaussLegendreTable> gauss_legendre(int order);

/// Fixed-order Gauss–Legendre approximation of the integral of f over [a, b].
double integrate_gl(const std::function<double(double)>& f, double a, double b, int order);

/// Adaptive bisection with a 20-point Gauss–Legendre panel. A panel is
/// accepted once splitting it changes the estimate by less than
/// rel_tol times the panel value (or abs_floor).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol = 1e-13, double abs_floor = 1e-300, int max_depth = 48);

/// Iterated adaptive integration over the box [lower, upper] in R^d.
double integrate_box_adaptive(const std::function<double(std::span<const double>)>& f,
                              std::span<const double> lower, std::span<const double> upper,
                              double rel_tol = 1e-12);

/// A weighted point set standing in for a measure: sum_q w_q f(x_q)
/// approximates the integral of f. Points are stored row-major with
/// `dim` coordinates each.
struct QuadratureRule {
    int dim = 0;
    std::vector<double> points;
    std::vector<double> weights;
    /// True when the rule reproduces the measure exactly (purely atomic).
    bool exact = false;

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t q) const {
        return {points.data() + q * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
    }
    void add(std::span<const double> x, double w) {
        points.insert(points.end(), x.begin(), x.end());
        weights.push_back(w);
    }
};

/// Tensor product of rules on independent coordinate blocks.
QuadratureRule tensor_product(const std::vector<QuadratureRule>& factors);

/// 1-D Gauss–Legendre rule on [a, b] split at every breakpoint strictly
/// inside, each piece carrying `order` nodes. Weights are multiplied by
/// `density_scale`.
QuadratureRule interval_rule(double a, double b, int order, std::span<const double> breakpoints,
                             double density_scale = 1.0);

}  // namespace dfvote
