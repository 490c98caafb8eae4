#include "dfvote/margin_pmf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dfvote/errors.hpp"
#include "dfvote/special.hpp"

namespace dfvote {

MarginPmf::MarginPmf(GroupSizes sizes) : sizes_(std::move(sizes)) {
    const int m = sizes_.groups();
    strides_.assign(static_cast<std::size_t>(m), 1);
    std::size_t total = 1;
    for (int l = m - 1; l >= 0; --l) {
        strides_[static_cast<std::size_t>(l)] = total;
        total *= static_cast<std::size_t>(sizes_[l] + 1);
    }
    values_.assign(total, 0.0);
}

std::size_t MarginPmf::flat_index(std::span<const std::int64_t> k) const {
    std::size_t flat = 0;
    for (int l = 0; l < sizes_.groups(); ++l) {
        const auto j = (sizes_[l] + k[static_cast<std::size_t>(l)]) / 2;
        flat += static_cast<std::size_t>(j) * strides_[static_cast<std::size_t>(l)];
    }
    return flat;
}

double MarginPmf::at(std::span<const std::int64_t> k) const {
    if (static_cast<int>(k.size()) != sizes_.groups()) throw std::invalid_argument("MarginPmf::at: dimension mismatch");
    for (int l = 0; l < sizes_.groups(); ++l) {
        const auto kl = k[static_cast<std::size_t>(l)];
        const auto nl = sizes_[l];
        if (kl < -nl || kl > nl || ((nl + kl) % 2) != 0) return 0.0;
    }
    return values_[flat_index(k)];
}

MarginVector MarginPmf::margin(std::size_t flat) const {
    MarginVector k(static_cast<std::size_t>(sizes_.groups()));
    for (int l = 0; l < sizes_.groups(); ++l) {
        const auto s = strides_[static_cast<std::size_t>(l)];
        const auto j = static_cast<std::int64_t>(flat / s);
        flat %= s;
        k[static_cast<std::size_t>(l)] = 2 * j - sizes_[l];
    }
    return k;
}

void MarginPmf::for_each(const std::function<void(const MarginVector&, double)>& f) const {
    for (std::size_t i = 0; i < values_.size(); ++i) f(margin(i), values_[i]);
}

double MarginPmf::total() const {
    double sum = 0.0;
    for (double v : values_) sum += v;
    return sum;
}

double MarginPmf::max_abs_difference(const MarginPmf& other) const {
    if (!(sizes_ == other.sizes_)) throw std::invalid_argument("MarginPmf: group sizes differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) worst = std::max(worst, std::abs(values_[i] - other.values_[i]));
    return worst;
}

double MarginPmf::symmetry_defect() const {
    // k -> -k maps the flat index i to (size - 1 - i) in every coordinate.
    double worst = 0.0;
    const std::size_t n = values_.size();
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(values_[i] - values_[n - 1 - i]));
    return worst;
}

MarginPmf conditional_margin_pmf(std::span<const double> m, const GroupSizes& sizes) {
    if (static_cast<int>(m.size()) != sizes.groups()) throw ConfigError("conditional pmf: bias dimension mismatch");
    for (double v : m)
        if (!(v >= -1.0 && v <= 1.0)) throw ConfigError("conditional pmf: bias must lie in [-1, 1]");
    MarginPmf pmf(sizes);
    std::vector<std::vector<double>> rows;
    for (int l = 0; l < sizes.groups(); ++l) {
        const auto n = sizes[l];
        const auto coeffs = log_binomial_row(n);
        std::vector<double> row(static_cast<std::size_t>(n + 1));
        const double ml = m[static_cast<std::size_t>(l)];
        binomial_pmf_row(n, 0.5 * (1.0 + ml), 0.5 * (1.0 - ml), coeffs, row);
        rows.push_back(std::move(row));
    }
    auto values = pmf.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto k = pmf.margin(i);
        double p = 1.0;
        for (int l = 0; l < sizes.groups(); ++l)
            p *= rows[static_cast<std::size_t>(l)][static_cast<std::size_t>((k[static_cast<std::size_t>(l)] + sizes[l]) / 2)];
        values[i] = p;
    }
    return pmf;
}

MarginPmf conditional_margin_pmf(std::span<const double> m, const GroupStructure& groups, std::int64_t n) {
    return conditional_margin_pmf(m, groups.resolve(n));
}

}  // namespace dfvote
