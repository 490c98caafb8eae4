#include "dfvote/groups.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dfvote/errors.hpp"

namespace dfvote {

std::int64_t GroupSizes::total() const { return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0}); }

std::vector<double> GroupSizes::proportions() const {
    const double n = static_cast<double>(total());
    std::vector<double> out;
    for (auto s : sizes) out.push_back(static_cast<double>(s) / n);
    return out;
}

double GroupSizes::lattice_size() const {
    double count = 1.0;
    for (auto s : sizes) count *= static_cast<double>(s + 1);
    return count;
}

GroupStructure::GroupStructure(std::vector<double> proportions) : proportions_(std::move(proportions)) {
    if (proportions_.empty()) throw ConfigError("group structure: at least one group required");
    double total = 0.0;
    for (double c : proportions_) {
        if (!(c > 0.0)) throw ConfigError("group structure: proportions must be > 0");
        total += c;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("group structure: proportions must sum to 1");
}

GroupStructure GroupStructure::equal(int groups) {
    return GroupStructure(std::vector<double>(static_cast<std::size_t>(groups), 1.0 / groups));
}

GroupSizes GroupStructure::resolve(std::int64_t n) const {
    const auto m = static_cast<std::int64_t>(proportions_.size());
    if (n < 2 * m)
        throw ConfigError("population n=" + std::to_string(n) + " too small for " + std::to_string(m) +
                          " groups of at least 2 voters");
    GroupSizes out;
    std::vector<double> remainder;
    std::int64_t assigned = 0;
    for (double c : proportions_) {
        const double exact = c * static_cast<double>(n);
        const auto base = static_cast<std::int64_t>(std::floor(exact));
        out.sizes.push_back(base);
        remainder.push_back(exact - static_cast<double>(base));
        assigned += base;
    }
    std::vector<std::size_t> order(proportions_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::int64_t k = 0; k < n - assigned; ++k) ++out.sizes[order[static_cast<std::size_t>(k) % order.size()]];
    for (auto& s : out.sizes) {
        while (s < 2) {
            auto largest = std::max_element(out.sizes.begin(), out.sizes.end());
            --*largest;
            ++s;
        }
    }
    return out;
}

}  // namespace dfvote
