#include "dfvote/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace dfvote {
namespace {

GaussLegendreTable build_table(int order) {
    GaussLegendreTable table;
    table.nodes.resize(order);
    table.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi initial guess, then Newton on P_order.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute derivative at the converged root.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order == 1 ? 1.0 : order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        table.nodes[i] = -x;
        table.nodes[order - 1 - i] = x;
        table.weights[i] = w;
        table.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) table.nodes[order / 2] = 0.0;
    return table;
}

double panel(const std::function<double(double)>& f, double a, double b,
             const GaussLegendreTable& t) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < t.nodes.size(); ++i) sum += t.weights[i] * f(mid + half * t.nodes[i]);
    return sum * half;
}

double adaptive_step(const std::function<double(double)>& f, double a, double b, double whole,
                     const GaussLegendreTable& t, double rel_tol, double abs_floor, int depth) {
    const double mid = 0.5 * (a + b);
    const double left = panel(f, a, mid, t);
    const double right = panel(f, mid, b, t);
    const double refined = left + right;
    if (depth <= 0 || std::abs(refined - whole) <= std::max(rel_tol * std::abs(refined), abs_floor))
        return refined;
    return adaptive_step(f, a, mid, left, t, rel_tol, abs_floor, depth - 1) +
           adaptive_step(f, mid, b, right, t, rel_tol, abs_floor, depth - 1);
}

}  // namespace

std::shared_ptr<const GaussLegendreTable> gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("Gauss-Legendre order must be positive");
    static std::mutex mutex;
    static std::map<int, std::shared_ptr<const GaussLegendreTable>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) slot = std::make_shared<const GaussLegendreTable>(build_table(order));
    return slot;
}

double integrate_gl(const std::function<double(double)>& f, double a, double b, int order) {
    return panel(f, a, b, *gauss_legendre(order));
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_floor, int max_depth) {
    if (a == b) return 0.0;
    const auto table = gauss_legendre(20);
    const double whole = panel(f, a, b, *table);
    return adaptive_step(f, a, b, whole, *table, rel_tol, abs_floor, max_depth);
}

namespace {

double box_recurse(const std::function<double(std::span<const double>)>& f,
                   std::span<const double> lower, std::span<const double> upper,
                   std::vector<double>& x, std::size_t axis, double rel_tol) {
    if (axis + 1 == x.size()) {
        return integrate_adaptive(
            [&](double v) {
                x[axis] = v;
                return f(x);
            },
            lower[axis], upper[axis], rel_tol);
    }
    return integrate_adaptive(
        [&](double v) {
            x[axis] = v;
            return box_recurse(f, lower, upper, x, axis + 1, rel_tol);
        },
        lower[axis], upper[axis], rel_tol);
}

}  // namespace

double integrate_box_adaptive(const std::function<double(std::span<const double>)>& f,
                              std::span<const double> lower, std::span<const double> upper,
                              double rel_tol) {
    if (lower.size() != upper.size() || lower.empty())
        throw std::invalid_argument("integrate_box_adaptive: bad box");
    std::vector<double> x(lower.size());
    return box_recurse(f, lower, upper, x, 0, rel_tol);
}

QuadratureRule tensor_product(const std::vector<QuadratureRule>& factors) {
    QuadratureRule out;
    out.dim = 0;
    out.exact = true;
    for (const auto& f : factors) {
        out.dim += f.dim;
        out.exact = out.exact && f.exact;
    }
    out.points.clear();
    out.weights = {1.0};
    std::vector<double> acc_points;  // row-major, growing dimension
    int acc_dim = 0;
    for (const auto& f : factors) {
        std::vector<double> next_points;
        std::vector<double> next_weights;
        next_points.reserve(out.weights.size() * f.size() * (acc_dim + f.dim));
        next_weights.reserve(out.weights.size() * f.size());
        for (std::size_t a = 0; a < out.weights.size(); ++a) {
            for (std::size_t b = 0; b < f.size(); ++b) {
                next_points.insert(next_points.end(), acc_points.begin() + a * acc_dim,
                                   acc_points.begin() + (a + 1) * acc_dim);
                auto pb = f.point(b);
                next_points.insert(next_points.end(), pb.begin(), pb.end());
                next_weights.push_back(out.weights[a] * f.weights[b]);
            }
        }
        acc_points = std::move(next_points);
        out.weights = std::move(next_weights);
        acc_dim += f.dim;
    }
    out.points = std::move(acc_points);
    return out;
}

QuadratureRule interval_rule(double a, double b, int order, std::span<const double> breakpoints,
                             double density_scale) {
    std::vector<double> cuts{a};
    for (double bp : breakpoints)
        if (bp > a && bp < b) cuts.push_back(bp);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    const auto table = gauss_legendre(order);
    QuadratureRule rule;
    rule.dim = 1;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
        const double half = 0.5 * (cuts[s + 1] - cuts[s]);
        for (int i = 0; i < order; ++i) {
            const double x = mid + half * table->nodes[i];
            rule.add(std::span<const double>(&x, 1), density_scale * half * table->weights[i]);
        }
    }
    return rule;
}

}  // namespace dfvote
