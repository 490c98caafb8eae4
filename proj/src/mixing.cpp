#include "dfvote/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dfvote/errors.hpp"
#include "dfvote/kernels.hpp"

namespace dfvote {
namespace {

MarginPmf pmf_for(const QuadratureRule& rule, const BiasMap& bias, const GroupSizes& sizes, int workers) {
    MarginPmf pmf(sizes);
    kernels::omp::accumulate_mixture_pmf(rule, bias, pmf, workers);
    return pmf;
}

}  // namespace

MarginPmf integrate_margin_pmf(const RuleFactory& rule_for, const BiasMap& bias, const GroupSizes& sizes,
                               int workers) {
    int order = kFirstQuadratureOrder;
    auto rule = rule_for(order);
    auto current = pmf_for(rule, bias, sizes, workers);
    if (rule.exact) return current;
    double change = 0.0;
    while (order < kMaxQuadratureOrder) {
        order *= 2;
        rule = rule_for(order);
        auto refined = pmf_for(rule, bias, sizes, workers);
        change = refined.max_abs_difference(current);
        current = std::move(refined);
        if (change <= kQuadratureStability) return current;
    }
    std::ostringstream os;
    os << "margin pmf quadrature did not stabilise: max entry change " << change << " at order " << order
       << " (tolerance " << kQuadratureStability << ")";
    throw ToleranceError(os.str());
}

RealVector integrate_escalating(const RuleFactory& rule_for,
                                const std::function<void(std::span<const double>, std::span<double>)>& f,
                                int outputs, double tol) {
    auto evaluate = [&](const QuadratureRule& rule) {
        RealVector sum(static_cast<std::size_t>(outputs), 0.0);
        RealVector value(static_cast<std::size_t>(outputs));
        for (std::size_t q = 0; q < rule.size(); ++q) {
            f(rule.point(q), value);
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += rule.weights[q] * value[i];
        }
        return sum;
    };
    int order = kFirstQuadratureOrder;
    auto rule = rule_for(order);
    auto current = evaluate(rule);
    if (rule.exact) return current;
    double change = 0.0;
    while (order < kMaxQuadratureOrder) {
        order *= 2;
        rule = rule_for(order);
        auto refined = evaluate(rule);
        change = 0.0;
        for (std::size_t i = 0; i < refined.size(); ++i)
            change = std::max(change, std::abs(refined[i] - current[i]));
        current = std::move(refined);
        if (change <= tol) return current;
    }
    std::ostringstream os;
    os << "quadrature did not stabilise: change " << change << " at order " << order;
    throw ToleranceError(os.str());
}

}  // namespace dfvote
