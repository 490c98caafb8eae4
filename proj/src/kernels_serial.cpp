#include <cmath>
#include <random>

#include "dfvote/kernels.hpp"
#include "dfvote/special.hpp"
#include "kernels_detail.hpp"

namespace dfvote::kernels {
namespace detail {

void binomial_rows_at(std::span<const double> x, const BiasMap& bias, const GroupSizes& sizes,
                      const std::vector<std::vector<double>>& log_coeffs, std::vector<std::vector<double>>& rows) {
    for (int l = 0; l < sizes.groups(); ++l) {
        const auto i = static_cast<std::size_t>(l);
        const double mbar = bias.apply(x[i]);
        binomial_pmf_row(sizes[l], 0.5 * (1.0 + mbar), 0.5 * (1.0 - mbar), log_coeffs[i], rows[i]);
    }
}

void add_outer_product(double weight, const std::vector<std::vector<double>>& rows, std::span<double> out) {
    if (rows.size() == 1) {
        const auto& r = rows[0];
        for (std::size_t j = 0; j < r.size(); ++j) out[j] += weight * r[j];
        return;
    }
    // Row-major walk with the last group varying fastest.
    const std::size_t m = rows.size();
    std::vector<std::size_t> idx(m, 0);
    std::vector<double> prefix(m + 1, weight);
    for (std::size_t l = 0; l < m; ++l) prefix[l + 1] = prefix[l] * rows[l][0];
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        out[flat] += prefix[m];
        std::size_t l = m;
        while (l-- > 0) {
            if (++idx[l] < rows[l].size()) break;
            idx[l] = 0;
        }
        if (l == static_cast<std::size_t>(-1)) break;
        for (std::size_t u = l; u < m; ++u) prefix[u + 1] = prefix[u] * rows[u][idx[u]];
    }
}

std::vector<std::vector<double>> log_coefficient_rows(const GroupSizes& sizes) {
    std::vector<std::vector<double>> out;
    for (auto n : sizes.sizes) out.push_back(log_binomial_row(n));
    return out;
}

std::vector<std::vector<double>> empty_rows(const GroupSizes& sizes) {
    std::vector<std::vector<double>> out;
    for (auto n : sizes.sizes) out.emplace_back(static_cast<std::size_t>(n + 1));
    return out;
}

void sample_chunk(const SamplingPlan& plan, std::int64_t chunk, std::span<std::int64_t> raw) {
    const auto m = static_cast<std::size_t>(plan.sizes.groups());
    const std::int64_t begin = chunk * kSampleChunk;
    const std::int64_t len = std::min(kSampleChunk, plan.count - begin);
    CounterRng rng(plan.seed, static_cast<std::uint64_t>(chunk));
    std::vector<double> biases(static_cast<std::size_t>(len) * m);
    plan.draw_biases(rng, biases);
    for (std::int64_t i = 0; i < len; ++i) {
        for (std::size_t l = 0; l < m; ++l) {
            const double mbar = biases[static_cast<std::size_t>(i) * m + l];
            const std::int64_t n = plan.sizes.sizes[l];
            const double p = 0.5 * (1.0 + mbar);
            std::int64_t plus;
            if (p <= 0.0) {
                plus = 0;
            } else if (p >= 1.0) {
                plus = n;
            } else {
                std::binomial_distribution<std::int64_t> binom(n, p);
                plus = binom(rng);
            }
            raw[static_cast<std::size_t>(begin + i) * m + l] = 2 * plus - n;
        }
    }
}

std::complex<double> ecf_at(std::span<const double> samples, int dim, std::span<const double> t) {
    const auto d = static_cast<std::size_t>(dim);
    const std::size_t count = samples.size() / d;
    double re = 0.0, im = 0.0;
    for (std::size_t s = 0; s < count; ++s) {
        double phase = 0.0;
        for (std::size_t i = 0; i < d; ++i) phase += t[i] * samples[s * d + i];
        re += std::cos(phase);
        im += std::sin(phase);
    }
    return {re / static_cast<double>(count), im / static_cast<double>(count)};
}

}  // namespace detail

namespace serial {

void accumulate_mixture_pmf(const QuadratureRule& rule, const BiasMap& bias, MarginPmf& out) {
    const auto& sizes = out.sizes();
    const auto coeffs = detail::log_coefficient_rows(sizes);
    auto rows = detail::empty_rows(sizes);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        if (rule.weights[q] == 0.0) continue;
        detail::binomial_rows_at(rule.point(q), bias, sizes, coeffs, rows);
        detail::add_outer_product(rule.weights[q], rows, out.values());
    }
}

void sample_margins(const SamplingPlan& plan, std::span<std::int64_t> raw) {
    const std::int64_t chunks = (plan.count + kSampleChunk - 1) / kSampleChunk;
    for (std::int64_t c = 0; c < chunks; ++c) detail::sample_chunk(plan, c, raw);
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples, int dim,
                                               std::span<const double> t) {
    const auto d = static_cast<std::size_t>(dim);
    std::vector<std::complex<double>> out(t.size() / d);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = detail::ecf_at(samples, dim, t.subspan(k * d, d));
    return out;
}

}  // namespace serial
}  // namespace dfvote::kernels
