#include "dfvote/margin_sample.hpp"

#include <cstdio>

namespace dfvote {

std::vector<double> MarginSample::group_column(int l) const {
    std::vector<double> out(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = normalized_at(i, l);
    return out;
}

MarginSample make_margin_sample(GroupSizes sizes, std::int64_t count, std::uint64_t seed, std::vector<double> gamma,
                                std::vector<std::string> regimes, std::vector<std::int64_t> raw) {
    MarginSample s;
    s.n = sizes.total();
    s.sizes = std::move(sizes);
    s.count = count;
    s.seed = seed;
    s.gamma = std::move(gamma);
    s.regimes = std::move(regimes);
    s.raw = std::move(raw);
    const auto m = static_cast<std::size_t>(s.groups());
    s.normalized.resize(s.raw.size());
    for (std::size_t i = 0; i < s.raw.size(); ++i) s.normalized[i] = static_cast<double>(s.raw[i]) / s.gamma[i % m];
    return s;
}

void write_margin_csv(const MarginSample& sample, std::ostream& out) {
    out << "sample_index,group,raw_margin,normalized_margin\n";
    char buf[64];
    for (std::int64_t i = 0; i < sample.count; ++i) {
        for (int l = 0; l < sample.groups(); ++l) {
            std::snprintf(buf, sizeof buf, "%.17g", sample.normalized_at(i, l));
            out << i << ',' << l << ',' << sample.raw_at(i, l) << ',' << buf << '\n';
        }
    }
}

nlohmann::json margin_manifest(const MarginSample& sample, const std::string& config_hash) {
    return {
        {"config_hash", config_hash},
        {"seed", sample.seed},
        {"n", sample.n},
        {"group_sizes", sample.sizes.sizes},
        {"count", sample.count},
        {"gamma", sample.gamma},
        {"regimes", sample.regimes},
    };
}

}  // namespace dfvote
