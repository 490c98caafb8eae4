#pragma once

#include <functional>
#include <span>

#include "dfvote/groups.hpp"
#include "dfvote/margin_pmf.hpp"
#include "dfvote/measure.hpp"
#include "dfvote/quadrature.hpp"

namespace dfvote {

/// Builds a quadrature rule for a de Finetti measure at a given
/// Gauss–Legendre order (nodes per coordinate).
using RuleFactory = std::function<QuadratureRule(int order)>;

inline constexpr int kFirstQuadratureOrder = 64;
inline constexpr int kMaxQuadratureOrder = 4096;
inline constexpr double kQuadratureStability = 1e-12;

/// Integral of the conditional margin pmf against the mixing measure.
/// Atomic rules are summed once; otherwise the order doubles from 64 until
/// no entry moves by more than 1e-12, failing with ToleranceError past 4096.
MarginPmf integrate_margin_pmf(const RuleFactory& rule_for, const BiasMap& bias, const GroupSizes& sizes,
                               int workers = 0);

/// Same escalation for a vector-valued integrand f(x, out).
RealVector integrate_escalating(const RuleFactory& rule_for,
                                const std::function<void(std::span<const double>, std::span<double>)>& f,
                                int outputs, double tol = kQuadratureStability);

}  // namespace dfvote
