#include <omp.h>

#include <algorithm>
#include <exception>

#include "dfvote/kernels.hpp"
#include "kernels_detail.hpp"

namespace dfvote::kernels {
namespace {

// Rule points are dealt round-robin to this many partial accumulators in
// blocks of kPointBlock; accumulators are summed in index order.
constexpr std::size_t kAccumulators = 8;
constexpr std::size_t kPointBlock = 16;

int resolve(int workers) { return workers > 0 ? workers : default_workers(); }

}  // namespace

int default_workers() { return omp_get_max_threads(); }

namespace omp {

void accumulate_mixture_pmf(const QuadratureRule& rule, const BiasMap& bias, MarginPmf& out, int workers) {
    const auto& sizes = out.sizes();
    const auto coeffs = detail::log_coefficient_rows(sizes);
    const std::size_t blocks = (rule.size() + kPointBlock - 1) / kPointBlock;
    const std::size_t parts = std::max<std::size_t>(1, std::min(kAccumulators, blocks));
    std::vector<std::vector<double>> partial(parts, std::vector<double>(out.size(), 0.0));

#pragma omp parallel for num_threads(resolve(workers)) schedule(dynamic, 1)
    for (std::size_t a = 0; a < parts; ++a) {
        auto rows = detail::empty_rows(sizes);
        for (std::size_t b = a; b < blocks; b += parts) {
            const std::size_t end = std::min(rule.size(), (b + 1) * kPointBlock);
            for (std::size_t q = b * kPointBlock; q < end; ++q) {
                if (rule.weights[q] == 0.0) continue;
                detail::binomial_rows_at(rule.point(q), bias, sizes, coeffs, rows);
                detail::add_outer_product(rule.weights[q], rows, partial[a]);
            }
        }
    }
    auto values = out.values();
    for (const auto& p : partial)
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += p[i];
}

void sample_margins(const SamplingPlan& plan, std::span<std::int64_t> raw, int workers) {
    const std::int64_t chunks = (plan.count + kSampleChunk - 1) / kSampleChunk;
    // Exceptions may not cross the parallel region; keep the one from the
    // lowest chunk so the reported error does not depend on scheduling.
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
#pragma omp parallel for num_threads(resolve(workers)) schedule(dynamic, 1)
    for (std::int64_t c = 0; c < chunks; ++c) {
        try {
            detail::sample_chunk(plan, c, raw);
        } catch (...) {
            errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::vector<std::complex<double>> empirical_cf(std::span<const double> samples, int dim,
                                               std::span<const double> t, int workers) {
    const auto d = static_cast<std::size_t>(dim);
    const auto points = static_cast<std::int64_t>(t.size() / d);
    std::vector<std::complex<double>> out(static_cast<std::size_t>(points));
#pragma omp parallel for num_threads(resolve(workers)) schedule(static)
    for (std::int64_t k = 0; k < points; ++k) {
        const auto i = static_cast<std::size_t>(k);
        out[i] = detail::ecf_at(samples, dim, t.subspan(i * d, d));
    }
    return out;
}

}  // namespace omp
}  // namespace dfvote::kernels
