#pragma once

#include <complex>
#include <span>
#include <vector>

#include "dfvote/kernels.hpp"

namespace dfvote::kernels::detail {

void binomial_rows_at(std::span<const double> x, const BiasMap& bias, const GroupSizes& sizes,
                      const std::vector<std::vector<double>>& log_coeffs, std::vector<std::vector<double>>& rows);
void add_outer_product(double weight, const std::vector<std::vector<double>>& rows, std::span<double> out);
std::vector<std::vector<double>> log_coefficient_rows(const GroupSizes& sizes);
std::vector<std::vector<double>> empty_rows(const GroupSizes& sizes);
void sample_chunk(const SamplingPlan& plan, std::int64_t chunk, std::span<std::int64_t> raw);
std::complex<double> ecf_at(std::span<const double> samples, int dim, std::span<const double> t);

}  // namespace dfvote::kernels::detail
