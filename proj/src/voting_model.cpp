#include "dfvote/voting_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/kernels.hpp"

namespace dfvote {
namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::int64_t kMaxPopulation = std::int64_t{1} << 40;

void check_lattice(const GroupSizes& sizes) {
    if (sizes.lattice_size() > kMaxExactLattice) {
        std::ostringstream os;
        os << "margin lattice has " << sizes.lattice_size() << " points; the exact pmf is limited to "
           << kMaxExactLattice;
        throw ResourceError(os.str());
    }
}

bool is_origin_atom(const BaseMeasure& m) {
    std::vector<double> zero(static_cast<std::size_t>(m.dimension()), 0.0);
    return m.mass_in_box(zero, zero) == 1.0;
}

// Rule ladder used by the brute-force oracle, separate from the escalation
// in exact_margin_pmf.
constexpr int kBruteOrderSingle = 96;
constexpr int kBruteOrderMulti = 40;
constexpr int kBruteDoublings = 3;

void enumerate_configurations(const QuadratureRule& rule, const std::vector<std::vector<double>>& plus,
                              const std::vector<std::vector<double>>& minus, const GroupSizes& sizes,
                              MarginPmf& out) {
    const auto m = static_cast<std::size_t>(sizes.groups());
    std::int64_t total = sizes.total();
    // voter v belongs to group owner[v]
    std::vector<std::size_t> owner;
    for (std::size_t l = 0; l < m; ++l)
        for (std::int64_t i = 0; i < sizes.sizes[l]; ++i) owner.push_back(l);
    const std::size_t q = rule.size();
    std::vector<std::vector<double>> stack(static_cast<std::size_t>(total) + 1, std::vector<double>(q));
    stack[0].assign(rule.weights.begin(), rule.weights.end());
    MarginVector k(m, 0);
    auto values = out.values();
    auto recurse = [&](auto&& self, std::size_t depth) -> void {
        if (depth == owner.size()) {
            double p = 0.0;
            for (double v : stack[depth]) p += v;
            values[out.flat_index(k)] += p;
            return;
        }
        const std::size_t l = owner[depth];
        const auto& prev = stack[depth];
        auto& next = stack[depth + 1];
        for (std::size_t j = 0; j < q; ++j) next[j] = prev[j] * plus[l][j];
        k[l] += 1;
        self(self, depth + 1);
        for (std::size_t j = 0; j < q; ++j) next[j] = prev[j] * minus[l][j];
        k[l] -= 2;
        self(self, depth + 1);
        k[l] += 1;
    };
    recurse(recurse, 0);
}

MarginPmf brute_force_with(const QuadratureRule& rule, const BiasMap& bias, const GroupSizes& sizes) {
    const auto m = static_cast<std::size_t>(sizes.groups());
    std::vector<std::vector<double>> plus(m, std::vector<double>(rule.size()));
    auto minus = plus;
    for (std::size_t j = 0; j < rule.size(); ++j) {
        const auto x = rule.point(j);
        for (std::size_t l = 0; l < m; ++l) {
            const double mbar = bias.apply(x[l]);
            plus[l][j] = 0.5 * (1.0 + mbar);
            minus[l][j] = 0.5 * (1.0 - mbar);
        }
    }
    MarginPmf out(sizes);
    enumerate_configurations(rule, plus, minus, sizes, out);
    return out;
}

}  // namespace

DeFinettiModel::DeFinettiModel(GroupStructure groups, DeFinettiSequence sequence, BiasMap bias)
    : groups_(std::move(groups)), sequence_(std::move(sequence)), bias_(bias) {
    const int m = groups_.groups();
    auto check_dim = [&](int d, const char* what) {
        if (d != m) {
            std::ostringstream os;
            os << what << " has dimension " << d << " but the model has " << m << " groups";
            throw ConfigError(os.str());
        }
    };
    std::visit(overloaded{
                   [&](const StaticSequence& s) {
                       check_dim(s.base.dimension(), "base measure");
                       if (!s.base.is_symmetric())
                           throw ConfigError("static base measure must be symmetric (mu(A) = mu(-A))");
                   },
                   [&](const ContractedSequence& s) {
                       check_dim(s.base.dimension(), "base measure");
                       check_dim(s.schedule.group_count(), "contraction schedule");
                   },
                   [&](const CurieWeissSequence& s) {
                       check_dim(s.coupling.groups(), "coupling matrix");
                       if (bias_.kind() != BiasMapKind::tanh)
                           throw ConfigError("the Curie-Weiss model uses the tanh bias map");
                   },
               },
               sequence_);
}

BaseMeasure DeFinettiModel::mixing_measure(const GroupSizes& sizes) const {
    return std::visit(overloaded{
                          [&](const StaticSequence& s) { return s.base; },
                          [&](const ContractedSequence& s) {
                              const auto eps = s.schedule.eps(sizes.sizes);
                              return s.base.contracted(eps);
                          },
                          [&](const CurieWeissSequence&) -> BaseMeasure {
                              throw ConfigError("the Curie-Weiss de Finetti measure is not a base measure");
                          },
                      },
                      sequence_);
}

RuleFactory DeFinettiModel::mixing_rule(const GroupSizes& sizes) const {
    if (const auto* cw = std::get_if<CurieWeissSequence>(&sequence_)) {
        auto measure = std::make_shared<CwmDeFinettiMeasure>(cw->coupling, sizes);
        return [measure](int order) { return measure->quadrature_rule(order); };
    }
    auto measure = mixing_measure(sizes);
    const auto bias = bias_;
    return [measure, bias](int order) { return measure.quadrature_rule(order, bias.breakpoints()); };
}

bool DeFinettiModel::independent() const {
    const auto* s = std::get_if<StaticSequence>(&sequence_);
    return s && is_origin_atom(s->base);
}

std::vector<double> DeFinettiModel::normalization(const GroupSizes& sizes) const {
    std::vector<double> gamma;
    for (int l = 0; l < sizes.groups(); ++l) {
        const double n = static_cast<double>(sizes[l]);
        if (const auto* c = std::get_if<ContractedSequence>(&sequence_)) {
            if (c->schedule.regime(l) == Regime::subcritical)
                gamma.push_back(c->schedule.eps(l, sizes[l]) * n);
            else
                gamma.push_back(std::sqrt(n));
        } else if (std::holds_alternative<StaticSequence>(sequence_) && !independent()) {
            gamma.push_back(n);
        } else {
            gamma.push_back(std::sqrt(n));
        }
    }
    return gamma;
}

std::optional<Regime> DeFinettiModel::regime(int group) const {
    if (const auto* c = std::get_if<ContractedSequence>(&sequence_)) return c->schedule.regime(group);
    return std::nullopt;
}

std::vector<std::string> DeFinettiModel::regime_tags() const {
    std::vector<std::string> tags;
    for (int l = 0; l < dimension(); ++l) {
        if (auto r = regime(l))
            tags.push_back(to_string(*r));
        else if (std::holds_alternative<CurieWeissSequence>(sequence_))
            tags.push_back("curie-weiss");
        else
            tags.push_back(independent() ? "independent" : "static");
    }
    return tags;
}

MarginPmf exact_margin_pmf(const DeFinettiModel& model, std::int64_t n, int workers) {
    return exact_margin_pmf(model, model.sizes(n), workers);
}

MarginPmf exact_margin_pmf(const DeFinettiModel& model, const GroupSizes& sizes, int workers) {
    check_lattice(sizes);
    return integrate_margin_pmf(model.mixing_rule(sizes), model.bias_map(), sizes, workers);
}

MarginPmf brute_force_pmf(const DeFinettiModel& model, std::int64_t n) {
    if (n > kMaxBruteForceVoters) {
        std::ostringstream os;
        os << "brute-force enumeration is limited to " << kMaxBruteForceVoters << " voters (got " << n << ")";
        throw ResourceError(os.str());
    }
    const auto sizes = model.sizes(n);
    const auto rule_for = model.mixing_rule(sizes);
    int order = model.dimension() == 1 ? kBruteOrderSingle : kBruteOrderMulti;
    auto rule = rule_for(order);
    auto current = brute_force_with(rule, model.bias_map(), sizes);
    if (rule.exact) return current;
    double change = 0.0;
    for (int d = 0; d < kBruteDoublings; ++d) {
        order *= 2;
        auto refined = brute_force_with(rule_for(order), model.bias_map(), sizes);
        change = refined.max_abs_difference(current);
        current = std::move(refined);
        if (change <= kQuadratureStability) return current;
    }
    std::ostringstream os;
    os << "brute-force quadrature did not stabilise: change " << change << " at order " << order;
    throw ToleranceError(os.str());
}

MarginSample sample_margins(const DeFinettiModel& model, std::int64_t n, std::int64_t count, std::uint64_t seed,
                            int workers) {
    if (count < 1) throw ConfigError("sample count must be at least 1");
    if (n > kMaxPopulation) throw ResourceError("population size exceeds the supported range (2^40)");
    const auto sizes = model.sizes(n);
    const auto m = static_cast<std::size_t>(sizes.groups());
    kernels::SamplingPlan plan;
    plan.sizes = sizes;
    plan.count = count;
    plan.seed = seed;
    const auto bias = model.bias_map();
    if (const auto* cw = std::get_if<CurieWeissSequence>(&model.sequence())) {
        if (!cw->coupling.high_temperature())
            throw ConfigError("the Curie-Weiss sampler is only validated for I - J positive definite");
        auto measure = std::make_shared<CwmDeFinettiMeasure>(cw->coupling, sizes);
        plan.draw_biases = [measure, m](CounterRng& rng, std::span<double> biases) {
            sample_cwm_latent(*measure, rng, static_cast<std::int64_t>(biases.size() / m), biases);
            for (auto& b : biases) b = std::tanh(b);
        };
    } else {
        auto measure = model.mixing_measure(sizes);
        plan.draw_biases = [measure, m, bias](CounterRng& rng, std::span<double> biases) {
            for (std::size_t i = 0; i < biases.size(); i += m) {
                auto row = biases.subspan(i, m);
                measure.sample_into(rng, row);
                bias.apply(row, row);
            }
        };
    }
    std::vector<std::int64_t> raw(static_cast<std::size_t>(count) * m);
    kernels::omp::sample_margins(plan, raw, workers);
    return make_margin_sample(sizes, count, seed, model.normalization(sizes), model.regime_tags(), std::move(raw));
}

GroupEstimate expected_abs_margin(const DeFinettiModel& model, std::int64_t n, EstimateMode mode,
                                  std::int64_t count, std::uint64_t seed, int workers) {
    const auto m = static_cast<std::size_t>(model.dimension());
    GroupEstimate out;
    out.values.assign(m, 0.0);
    out.standard_errors.assign(m, 0.0);
    if (mode == EstimateMode::exact) {
        const auto pmf = exact_margin_pmf(model, n, workers);
        const auto& sizes = pmf.sizes();
        pmf.for_each([&](const MarginVector& k, double p) {
            for (std::size_t l = 0; l < m; ++l)
                out.values[l] += p * static_cast<double>(std::abs(k[l])) / static_cast<double>(sizes.sizes[l]);
        });
        return out;
    }
    const auto sample = sample_margins(model, n, count, seed, workers);
    std::vector<double> sq(m, 0.0);
    for (std::int64_t i = 0; i < sample.count; ++i) {
        for (std::size_t l = 0; l < m; ++l) {
            const double v = static_cast<double>(std::abs(sample.raw_at(i, static_cast<int>(l)))) /
                             static_cast<double>(sample.sizes.sizes[l]);
            out.values[l] += v;
            sq[l] += v * v;
        }
    }
    const double c = static_cast<double>(sample.count);
    for (std::size_t l = 0; l < m; ++l) {
        out.values[l] /= c;
        const double var = std::max(0.0, sq[l] / c - out.values[l] * out.values[l]) * c / std::max(1.0, c - 1.0);
        out.standard_errors[l] = std::sqrt(var / c);
    }
    return out;
}

std::vector<double> pair_correlation(const DeFinettiModel& model, std::int64_t n) {
    const auto sizes = model.sizes(n);
    const int m = model.dimension();
    const auto bias = model.bias_map();
    auto values = integrate_escalating(
        model.mixing_rule(sizes),
        [&](std::span<const double> x, std::span<double> out) {
            for (int l = 0; l < m; ++l) {
                const double b = bias.apply(x[static_cast<std::size_t>(l)]);
                out[static_cast<std::size_t>(l)] = b * b;
            }
        },
        m);
    return values;
}

}  // namespace dfvote
