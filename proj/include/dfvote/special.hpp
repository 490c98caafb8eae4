#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dfvote {

double normal_pdf(double x);
double normal_cdf(double x);

/// Density of N(0, I_d) at x.
double standard_normal_density(std::span<const double> x);

/// ln C(n, k) via lgamma; exact zero at the endpoints.
double log_binomial_coefficient(std::int64_t n, std::int64_t k);

/// ln cosh x, evaluated so that the result is exactly even in x.
double log_cosh(double x);

/// Binomial(n, p) probabilities for k = 0..n written to out (size n+1).
/// `log_coeffs` must hold ln C(n, k). The complement q = 1 - p is passed
/// separately so callers can form it without cancellation.
void binomial_pmf_row(std::int64_t n, double p, double q, std::span<const double> log_coeffs,
                      std::span<double> out);

/// ln C(n, k) for k = 0..n, mirrored so row[k] == row[n-k] bitwise.
std::vector<double> log_binomial_row(std::int64_t n);

/// Ordinary least-squares line y = intercept + slope * x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    /// Sum of squared residuals over (points - 2); 0 when no degrees of freedom remain.
    double residual_variance = 0.0;
    double r2 = 1.0;
};

/// Needs at least two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace dfvote
