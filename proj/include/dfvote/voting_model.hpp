#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dfvote/cwm.hpp"
#include "dfvote/groups.hpp"
#include "dfvote/margin_pmf.hpp"
#include "dfvote/margin_sample.hpp"
#include "dfvote/measure.hpp"
#include "dfvote/mixing.hpp"

namespace dfvote {

/// Collective bias model: the same mixing measure for every n.
struct StaticSequence {
    BaseMeasure base;
};

/// mu_n = base contracted by eps_{n,l} per group.
struct ContractedSequence {
    BaseMeasure base;
    ContractionSchedule schedule;
};

struct CurieWeissSequence {
    CouplingSpec coupling;
};

using DeFinettiSequence = std::variant<StaticSequence, ContractedSequence, CurieWeissSequence>;

/// A voting model: votes are conditionally independent given a latent bias
/// drawn from mu_n, with P(X = +1) = (1 + bias(m)_l) / 2 in group l.
class DeFinettiModel {
public:
    DeFinettiModel(GroupStructure groups, DeFinettiSequence sequence, BiasMap bias);

    const GroupStructure& groups() const { return groups_; }
    const DeFinettiSequence& sequence() const { return sequence_; }
    const BiasMap& bias_map() const { return bias_; }
    int dimension() const { return groups_.groups(); }
    GroupSizes sizes(std::int64_t n) const { return groups_.resolve(n); }

    /// mu_n for static and contracted sequences.
    BaseMeasure mixing_measure(const GroupSizes& sizes) const;
    RuleFactory mixing_rule(const GroupSizes& sizes) const;

    /// gamma_{n,l}: sqrt(n_l) for fast, critical, Curie–Weiss and the
    /// independent (point mass at 0) static model; eps n_l for subcritical
    /// groups; n_l for other static models.
    std::vector<double> normalization(const GroupSizes& sizes) const;
    std::vector<std::string> regime_tags() const;
    /// Regime per group for contracted models.
    std::optional<Regime> regime(int group) const;

    /// True for the static point mass at the origin (independent fair coins).
    bool independent() const;

private:
    GroupStructure groups_;
    DeFinettiSequence sequence_;
    BiasMap bias_;
};

inline constexpr double kMaxExactLattice = 1e7;
inline constexpr std::int64_t kMaxBruteForceVoters = 20;

/// P_n(S = k) by exact summation over atoms or escalating quadrature.
MarginPmf exact_margin_pmf(const DeFinettiModel& model, std::int64_t n, int workers = 0);
MarginPmf exact_margin_pmf(const DeFinettiModel& model, const GroupSizes& sizes, int workers = 0);

/// Independent oracle: sums the probability of each of the 2^n voting
/// configurations. n at most 20.
MarginPmf brute_force_pmf(const DeFinettiModel& model, std::int64_t n);

MarginSample sample_margins(const DeFinettiModel& model, std::int64_t n, std::int64_t count, std::uint64_t seed,
                            int workers = 0);

enum class EstimateMode { exact, monte_carlo };

struct GroupEstimate {
    std::vector<double> values;
    /// Zero in exact mode.
    std::vector<double> standard_errors;
};

/// E(|S_{n,l}| / n_l) per group.
GroupEstimate expected_abs_margin(const DeFinettiModel& model, std::int64_t n, EstimateMode mode,
                                  std::int64_t count = 100000, std::uint64_t seed = 0, int workers = 0);

/// E[bias(m)_l^2] = E X_{l1} X_{l2} per group.
std::vector<double> pair_correlation(const DeFinettiModel& model, std::int64_t n);

}  // namespace dfvote
