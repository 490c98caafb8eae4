#include "dfvote/special.hpp"

#include <cmath>
#include <numbers>

namespace dfvote {

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double standard_normal_density(std::span<const double> x) {
    double q = 0.0;
    for (double v : x) q += v * v;
    return std::exp(-0.5 * q) * std::pow(2.0 * std::numbers::pi, -0.5 * static_cast<double>(x.size()));
}

double log_binomial_coefficient(std::int64_t n, std::int64_t k) {
    if (k == 0 || k == n) return 0.0;
    const double dn = static_cast<double>(n);
    const double dk = static_cast<double>(k);
    return std::lgamma(dn + 1.0) - std::lgamma(dk + 1.0) - std::lgamma(dn - dk + 1.0);
}

double log_cosh(double x) {
    const double a = std::abs(x);
    if (a < 1.0) {
        const double sh = std::sinh(a);
        return 0.5 * std::log1p(sh * sh);
    }
    return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

std::vector<double> log_binomial_row(std::int64_t n) {
    std::vector<double> row(static_cast<std::size_t>(n + 1));
    for (std::int64_t k = 0; 2 * k <= n; ++k) {
        const double v = log_binomial_coefficient(n, k);
        row[static_cast<std::size_t>(k)] = v;
        row[static_cast<std::size_t>(n - k)] = v;
    }
    return row;
}

void binomial_pmf_row(std::int64_t n, double p, double q, std::span<const double> log_coeffs,
                      std::span<double> out) {
    if (p <= 0.0) {
        for (auto& v : out) v = 0.0;
        out[0] = 1.0;
        return;
    }
    if (q <= 0.0) {
        for (auto& v : out) v = 0.0;
        out[static_cast<std::size_t>(n)] = 1.0;
        return;
    }
    const double lp = std::log(p);
    const double lq = std::log(q);
    for (std::int64_t k = 0; k <= n; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out[i] = std::exp(log_coeffs[i] + static_cast<double>(k) * lp + static_cast<double>(n - k) * lq);
    }
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const auto n = x.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        sse += r * r;
    }
    fit.residual_variance = n > 2 ? sse / static_cast<double>(n - 2) : 0.0;
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace dfvote
