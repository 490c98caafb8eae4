#include "dfvote/limit_law.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/mixing.hpp"
#include "dfvote/special.hpp"
#include "dfvote/voting_model.hpp"

namespace dfvote {

std::string to_string(LimitKind kind) {
    switch (kind) {
        case LimitKind::standard_gaussian: return "standard_gaussian";
        case LimitKind::convolution: return "convolution";
        case LimitKind::base_measure: return "base_measure";
        case LimitKind::cluster_product: return "cluster_product";
    }
    return "unknown";
}

LimitLaw LimitLaw::standard_gaussian(int dim) {
    if (dim < 1) throw ConfigError("limit law dimension must be positive");
    LimitLaw law;
    law.kind_ = LimitKind::standard_gaussian;
    law.gauss_.assign(static_cast<std::size_t>(dim), 1.0);
    law.scale_.assign(static_cast<std::size_t>(dim), 0.0);
    return law;
}

LimitLaw LimitLaw::convolution(BaseMeasure base, std::vector<double> h) {
    if (static_cast<int>(h.size()) != base.dimension()) throw ConfigError("convolution: h has the wrong length");
    LimitLaw law;
    law.kind_ = LimitKind::convolution;
    law.gauss_.assign(h.size(), 1.0);
    law.scale_ = std::move(h);
    law.base_ = std::move(base);
    return law;
}

LimitLaw LimitLaw::base_measure(BaseMeasure base) {
    LimitLaw law;
    law.kind_ = LimitKind::base_measure;
    law.gauss_.assign(static_cast<std::size_t>(base.dimension()), 0.0);
    law.scale_.assign(static_cast<std::size_t>(base.dimension()), 1.0);
    law.base_ = std::move(base);
    return law;
}

LimitLaw LimitLaw::cluster_product(BaseMeasure base, std::vector<Regime> regimes, std::vector<double> h) {
    const auto m = static_cast<std::size_t>(base.dimension());
    if (regimes.size() != m || h.size() != m) throw ConfigError("cluster product: regime/h count mismatch");
    LimitLaw law;
    law.kind_ = LimitKind::cluster_product;
    for (std::size_t l = 0; l < m; ++l) {
        switch (regimes[l]) {
            case Regime::fast:
                law.gauss_.push_back(1.0);
                law.scale_.push_back(0.0);
                break;
            case Regime::critical:
                law.gauss_.push_back(1.0);
                law.scale_.push_back(h[l]);
                break;
            case Regime::subcritical:
                law.gauss_.push_back(0.0);
                law.scale_.push_back(1.0);
                break;
        }
    }
    law.base_ = std::move(base);
    return law;
}

std::array<std::vector<int>, 3> LimitLaw::clusters() const {
    std::array<std::vector<int>, 3> out;
    for (int l = 0; l < dimension(); ++l) {
        const auto i = static_cast<std::size_t>(l);
        if (scale_[i] == 0.0)
            out[0].push_back(l);
        else if (gauss_[i] != 0.0)
            out[1].push_back(l);
        else
            out[2].push_back(l);
    }
    return out;
}

std::complex<double> LimitLaw::cf(std::span<const double> t) const {
    double q = 0.0;
    std::vector<double> scaled(t.size());
    bool touches_base = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        q += gauss_[i] * t[i] * t[i];
        scaled[i] = scale_[i] * t[i];
        touches_base = touches_base || scaled[i] != 0.0;
    }
    std::complex<double> value(std::exp(-0.5 * q), 0.0);
    if (touches_base) value *= base_->characteristic_function(scaled);
    return value;
}

LimitLaw LimitLaw::marginal(int coord) const {
    const auto i = static_cast<std::size_t>(coord);
    if (scale_.at(i) == 0.0) return standard_gaussian(1);
    const int c[1] = {coord};
    auto base = base_->marginal(c);
    if (gauss_[i] == 0.0) return base_measure(std::move(base));
    return convolution(std::move(base), {scale_[i]});
}

void LimitLaw::sample_into(CounterRng& rng, std::span<double> out) const {
    std::normal_distribution<double> normal;
    std::vector<double> y(out.size(), 0.0);
    if (base_) base_->sample_into(rng, y);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double z = gauss_[i] != 0.0 ? normal(rng) : 0.0;
        out[i] = gauss_[i] * z + scale_[i] * y[i];
    }
}

std::string LimitLaw::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << "(dim=" << dimension();
    if (base_) os << ", base=" << base_->describe();
    os << ")";
    return os.str();
}

LimitLaw limit_for(const DeFinettiModel& model) {
    const int m = model.dimension();
    if (const auto* c = std::get_if<ContractedSequence>(&model.sequence())) {
        std::vector<Regime> regimes;
        std::vector<double> h;
        bool all_fast = true, all_critical = true, all_sub = true;
        for (int l = 0; l < m; ++l) {
            const auto r = c->schedule.regime(l);
            regimes.push_back(r);
            h.push_back(r == Regime::critical ? c->schedule.critical_constant(l) : 1.0);
            all_fast = all_fast && r == Regime::fast;
            all_critical = all_critical && r == Regime::critical;
            all_sub = all_sub && r == Regime::subcritical;
        }
        if (all_fast) return LimitLaw::standard_gaussian(m);
        if (all_critical) return LimitLaw::convolution(c->base, std::move(h));
        if (all_sub) return LimitLaw::base_measure(c->base);
        return LimitLaw::cluster_product(c->base, std::move(regimes), std::move(h));
    }
    if (const auto* s = std::get_if<StaticSequence>(&model.sequence())) {
        if (model.independent()) return LimitLaw::standard_gaussian(m);
        if (model.bias_map().kind() == BiasMapKind::clamp_identity) {
            std::vector<double> lo(static_cast<std::size_t>(m), -1.0), hi(static_cast<std::size_t>(m), 1.0);
            if (s->base.mass_in_box(lo, hi) == 1.0) return LimitLaw::base_measure(s->base);
        }
        throw ConfigError("the limit of a static model is the bias-map image of its base measure, which is only "
                          "available for clamp with support in [-1, 1]^M");
    }
    throw ConfigError("no analytic limit law for the Curie-Weiss model (its limiting covariance has no closed form "
                      "here); compare against empirical statistics instead");
}

CdfValue limit_cdf(const LimitLaw& law, std::span<const double> x, std::uint64_t seed) {
    const int m = law.dimension();
    if (static_cast<int>(x.size()) != m) throw ConfigError("limit_cdf: point has the wrong dimension");
    if (m == 1) return {limit_cdf(law, x[0]), 0.0};
    CounterRng rng(seed, 0);
    std::vector<double> draw(static_cast<std::size_t>(m));
    std::int64_t hits = 0;
    for (std::int64_t i = 0; i < kLimitCdfDraws; ++i) {
        law.sample_into(rng, draw);
        bool inside = true;
        for (std::size_t l = 0; l < draw.size(); ++l) inside = inside && draw[l] <= x[l];
        hits += inside ? 1 : 0;
    }
    const double p = static_cast<double>(hits) / static_cast<double>(kLimitCdfDraws);
    return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(kLimitCdfDraws))};
}

double limit_cdf(const LimitLaw& law, double x) {
    if (law.dimension() != 1) throw ConfigError("scalar limit_cdf needs a one-dimensional law");
    if (law.base_scales()[0] == 0.0) return normal_cdf(x);
    if (law.gaussian_weights()[0] == 0.0) {
        const double lo = -std::numeric_limits<double>::infinity();
        return law.base()->mass_in_box(std::span<const double>(&lo, 1), std::span<const double>(&x, 1));
    }
    // E Phi(x - h Y) over the base measure.
    const double h = law.base_scales()[0];
    const auto& base = *law.base();
    const auto values = integrate_escalating(
        [&](int order) { return base.quadrature_rule(order); },
        [&](std::span<const double> y, std::span<double> out) { out[0] = normal_cdf(x - h * y[0]); }, 1);
    return std::clamp(values[0], 0.0, 1.0);
}

std::complex<double> limit_cf(const LimitLaw& law, std::span<const double> t) { return law.cf(t); }

std::complex<double> conditional_cf(double m, double t) { return {std::cos(t), m * std::sin(t)}; }

}  // namespace dfvote
