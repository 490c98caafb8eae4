#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dfvote/groups.hpp"
#include "dfvote/margin_pmf.hpp"
#include "dfvote/measure.hpp"
#include "dfvote/quadrature.hpp"
#include "dfvote/rng.hpp"

// Data-parallel inner loops. Each kernel has a plain serial reference in
// dfvote::kernels::serial and an OpenMP version in dfvote::kernels::omp.
// The OpenMP versions partition work into fixed blocks whose layout does
// not depend on the thread count, so their output is bitwise identical for
// every `workers` value.
namespace dfvote::kernels {

/// Samples per random stream in the margin sampler. Chunk c of a run with
/// seed s draws from CounterRng(s, c).
inline constexpr std::int64_t kSampleChunk = 4096;

/// Fills `biases` (len x M, row-major) with conditional vote biases in
/// [-1, 1] for one chunk, drawing from `rng`.
using BiasBatchSampler = std::function<void(CounterRng& rng, std::span<double> biases)>;

struct SamplingPlan {
    GroupSizes sizes;
    std::int64_t count = 0;
    std::uint64_t seed = 0;
    BiasBatchSampler draw_biases;
};

namespace serial {

/// out += sum_q w_q * P_{bias(x_q)}(S = .) over the rule's points.
void accumulate_mixture_pmf(const QuadratureRule& rule, const BiasMap& bias, MarginPmf& out);

/// Two-stage margin draw; raw has count x M entries.
void sample_margins(const SamplingPlan& plan, std::span<std::int64_t> raw);

/// Empirical characteristic function of `samples` (count x dim) at each
/// row of `t` (points x dim).
std::vector<std::complex<double>> empirical_cf(std::span<const double> samples, int dim,
                                               std::span<const double> t);

}  // namespace serial

namespace omp {

void accumulate_mixture_pmf(const QuadratureRule& rule, const BiasMap& bias, MarginPmf& out, int workers);
void sample_margins(const SamplingPlan& plan, std::span<std::int64_t> raw, int workers);
std::vector<std::complex<double>> empirical_cf(std::span<const double> samples, int dim,
                                               std::span<const double> t, int workers);

}  // namespace omp

/// Default worker count (OpenMP's choice).
int default_workers();

}  // namespace dfvote::kernels
