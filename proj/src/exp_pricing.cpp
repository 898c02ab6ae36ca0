#include "riskalloc/exp_pricing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace riskalloc {

namespace {

void check_inputs(const EventTree& tree, const RiskAversionSchedule& schedule,
                  const TerminalRisk& w) {
    if (schedule.term() != tree.depth())
        throw std::invalid_argument("risk aversion schedule must cover every tree period");
    if (w.values.size() != tree.leaf_count())
        throw std::invalid_argument("terminal risk needs one value per leaf");
    for (double v : w.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("terminal risk values must be finite");
    }
}

void check_rates(const EventTree& tree, const RateCurve& rates) {
    if (rates.term() < tree.depth())
        throw std::invalid_argument("rate curve is shorter than the tree horizon");
}

// log E[exp(values) | node] over the node's children, max-shifted.
double log_conditional_mean(const EventTree& tree, int child_level, std::size_t node,
                            const LevelValues& values) {
    double shift = -std::numeric_limits<double>::infinity();
    for (std::size_t c : tree.children(child_level - 1, node)) {
        double term = std::log(tree.edge_prob(child_level, c)) + values[c];
        if (term > shift) shift = term;
    }
    double sum = 0.0;
    for (std::size_t c : tree.children(child_level - 1, node))
        sum += std::exp(std::log(tree.edge_prob(child_level, c)) + values[c] - shift);
    return shift + std::log(sum);
}

// Negated kernel: log_risk_kernel of -z without materializing the flipped risk.
AdaptedProcess kernel_of_negated(const EventTree& tree, const RiskAversionSchedule& schedule,
                                 const TerminalRisk& z) {
    TerminalRisk negated = z;
    for (double& v : negated.values) v = -v;
    return log_risk_kernel(tree, schedule, negated);
}

// log E[exp(level-1 values)] under the root.
double log_root_mean(const EventTree& tree, const LevelValues& values) {
    return log_conditional_mean(tree, 1, 0, values);
}

}  // namespace

AdaptedProcess log_risk_kernel(const EventTree& tree, const RiskAversionSchedule& schedule,
                               const TerminalRisk& w) {
    check_inputs(tree, schedule, w);
    int depth = tree.depth();

    AdaptedProcess kernel = AdaptedProcess::zeros(tree);
    double alpha_last = schedule.alpha(depth);
    for (std::size_t i = 0; i < w.values.size(); ++i)
        kernel.at(depth)[i] = -alpha_last * w.values[i];

    for (int t = depth; t >= 2; --t) {
        double shrink = schedule.beta(t - 1) / schedule.beta(t);
        for (std::size_t node = 0; node < tree.level_size(t - 1); ++node)
            kernel.at(t - 1)[node] = shrink * log_conditional_mean(tree, t, node, kernel.at(t));
    }
    return kernel;
}

AdaptedProcess log_marginal_martingale(const EventTree& tree, const RiskAversionSchedule& schedule,
                                       const TerminalRisk& w) {
    auto kernel = log_risk_kernel(tree, schedule, w);
    int depth = tree.depth();

    AdaptedProcess log_m = AdaptedProcess::zeros(tree);
    LevelValues carried_prev;  // per-node weighted kernel history at level t-1
    for (int t = 1; t <= depth; ++t) {
        std::size_t n = tree.level_size(t);
        LevelValues carried(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double history = t == 1 ? 0.0 : carried_prev[tree.parent(t, i)];
            log_m.at(t)[i] = kernel.at(t)[i] - history;
            if (t < depth)
                carried[i] = history + schedule.beta(t + 1) / schedule.alpha(t) * kernel.at(t)[i];
        }
        carried_prev = std::move(carried);
    }
    return log_m;
}

AdaptedProcess optimal_allocation(const EventTree& tree, const RateCurve& rates,
                                  const RiskAversionSchedule& schedule, const TerminalRisk& w) {
    check_rates(tree, rates);
    auto log_m = log_marginal_martingale(tree, schedule, w);
    AdaptedProcess plan = AdaptedProcess::zeros(tree);
    for (int t = 1; t <= tree.depth(); ++t) {
        double scale = rates.bond_price(t) / schedule.alpha(t);
        for (std::size_t i = 0; i < log_m.at(t).size(); ++i)
            plan.at(t)[i] = -scale * log_m.at(t)[i];
    }
    return plan;
}

double utility_value(const EventTree& tree, const RiskAversionSchedule& schedule,
                     const TerminalRisk& w) {
    auto kernel = log_risk_kernel(tree, schedule, w);
    double beta1 = schedule.beta(1);
    return -std::expm1(log_root_mean(tree, kernel.at(1))) / beta1;
}

double indifference_price(const EventTree& tree, const RiskAversionSchedule& schedule,
                          const TerminalRisk& z) {
    auto kernel = kernel_of_negated(tree, schedule, z);
    return log_root_mean(tree, kernel.at(1)) / schedule.beta(1);
}

AdaptedProcess selling_allocation(const EventTree& tree, const RateCurve& rates,
                                  const RiskAversionSchedule& schedule, double wealth,
                                  const TerminalRisk& z) {
    check_rates(tree, rates);
    if (!std::isfinite(wealth)) throw std::invalid_argument("wealth must be finite");

    // The claim only enters through its negated kernel; wealth adds the
    // deterministic spread beta_1 * wealth to every log-marginal.
    TerminalRisk negated = z;
    for (double& v : negated.values) v = -v;
    auto log_m = log_marginal_martingale(tree, schedule, negated);

    double beta1 = schedule.beta(1);
    AdaptedProcess plan = AdaptedProcess::zeros(tree);
    for (int t = 1; t <= tree.depth(); ++t) {
        double scale = rates.bond_price(t) / schedule.alpha(t);
        for (std::size_t i = 0; i < log_m.at(t).size(); ++i)
            plan.at(t)[i] = scale * (beta1 * wealth - log_m.at(t)[i]);
    }
    return plan;
}

}  // namespace riskalloc
