#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace dfvote {

/// Resolved group sizes n_1..n_M for one population size n.
struct GroupSizes {
    std::vector<std::int64_t> sizes;

    int groups() const { return static_cast<int>(sizes.size()); }
    std::int64_t total() const;
    std::int64_t operator[](int l) const { return sizes[static_cast<std::size_t>(l)]; }
    /// alpha_l = n_l / n.
    std::vector<double> proportions() const;
    /// Number of lattice points prod_l (n_l + 1).
    double lattice_size() const;

    bool operator==(const GroupSizes&) const = default;
};

/// Fixed group proportions c_l with a largest-remainder resolver: each
/// n_l starts at floor(c_l n), the remainder goes to the largest fractional
/// parts (ties to the lower index), then any group below 2 voters is topped
/// up from the currently largest group. Sum n_l = n always holds.
class GroupStructure {
public:
    explicit GroupStructure(std::vector<double> proportions);
    static GroupStructure single() { return GroupStructure({1.0}); }
    static GroupStructure equal(int groups);

    int groups() const { return static_cast<int>(proportions_.size()); }
    const std::vector<double>& proportions() const { return proportions_; }

    /// Throws ConfigError when n < 2M.
    GroupSizes resolve(std::int64_t n) const;

private:
    std::vector<double> proportions_;
};

}  // namespace dfvote
