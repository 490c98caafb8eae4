#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dfvote/groups.hpp"

namespace dfvote {

using MarginVector = std::vector<std::int64_t>;

/// Probability mass function of the group margin vector (S_1, ..., S_M)
/// on its lattice prod_l {-n_l, -n_l + 2, ..., n_l}. Stored densely in
/// row-major order of the vote counts j_l = (n_l + S_l) / 2.
class MarginPmf {
public:
    MarginPmf() = default;
    explicit MarginPmf(GroupSizes sizes);

    const GroupSizes& sizes() const { return sizes_; }
    std::size_t size() const { return values_.size(); }

    /// P(S = k); zero off the lattice (wrong parity or |k_l| > n_l).
    double at(std::span<const std::int64_t> k) const;
    double at(std::int64_t k) const { return at(std::span<const std::int64_t>(&k, 1)); }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// Margin vector for a flat index.
    MarginVector margin(std::size_t flat) const;
    std::size_t flat_index(std::span<const std::int64_t> k) const;

    void for_each(const std::function<void(const MarginVector&, double)>& f) const;

    double total() const;
    /// Largest |p(k) - other(k)|; requires identical group sizes.
    double max_abs_difference(const MarginPmf& other) const;
    /// Largest |p(k) - p(-k)|.
    double symmetry_defect() const;

private:
    GroupSizes sizes_;
    std::vector<std::size_t> strides_;
    std::vector<double> values_;
};

/// Margin law under the conditional product measure P_m: independent votes,
/// +1 with probability (1 + m_l)/2 in group l. `m` must already lie in
/// [-1, 1]^M (i.e. after the bias map).
MarginPmf conditional_margin_pmf(std::span<const double> m, const GroupSizes& sizes);
MarginPmf conditional_margin_pmf(std::span<const double> m, const GroupStructure& groups, std::int64_t n);

}  // namespace dfvote
