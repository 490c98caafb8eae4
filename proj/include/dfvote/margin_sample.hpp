#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "dfvote/groups.hpp"
#include "json.hpp"

namespace dfvote {

/// A batch of group margin vectors with the normalization that was applied.
/// raw and normalized are row-major, count x M.
struct MarginSample {
    std::int64_t n = 0;
    GroupSizes sizes;
    std::int64_t count = 0;
    std::uint64_t seed = 0;
    std::vector<double> gamma;
    std::vector<std::string> regimes;
    std::vector<std::int64_t> raw;
    std::vector<double> normalized;

    int groups() const { return sizes.groups(); }
    std::int64_t raw_at(std::int64_t i, int l) const {
        return raw[static_cast<std::size_t>(i) * static_cast<std::size_t>(groups()) + static_cast<std::size_t>(l)];
    }
    double normalized_at(std::int64_t i, int l) const {
        return normalized[static_cast<std::size_t>(i) * static_cast<std::size_t>(groups()) + static_cast<std::size_t>(l)];
    }
    /// Normalized margins of one group.
    std::vector<double> group_column(int l) const;
};

/// Fills `normalized` from `raw` and `gamma`.
MarginSample make_margin_sample(GroupSizes sizes, std::int64_t count, std::uint64_t seed, std::vector<double> gamma,
                                std::vector<std::string> regimes, std::vector<std::int64_t> raw);

/// Columns: sample_index,group,raw_margin,normalized_margin (one row per
/// sample and group; normalized values printed with 17 significant digits).
void write_margin_csv(const MarginSample& sample, std::ostream& out);

nlohmann::json margin_manifest(const MarginSample& sample, const std::string& config_hash);

}  // namespace dfvote
