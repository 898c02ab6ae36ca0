#pragma once

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "riskalloc/event_tree.hpp"
#include "riskalloc/rate_curve.hpp"
#include "riskalloc/risk_aversion.hpp"

namespace riskalloc::oracle {

/// Brute-force counterpart of the closed-form engine: maximize total expected
/// utility over admissible allocations by numerical optimization, knowing
/// nothing about the closed forms.  Everything here works on discounted
/// allocations; the admissibility constraint is that discounted path sums
/// equal the terminal risk.

/// Period utilities as plain callables of (t, x), t in [1, term].
struct UtilitySpec {
    int term = 0;
    std::function<double(int, double)> value;
    std::function<double(int, double)> derivative;

    static UtilitySpec exponential(const RiskAversionSchedule& schedule);

    /// Exponential utilities rescaled by positive weights (weights.size() == term).
    static UtilitySpec weighted_exponential(const RiskAversionSchedule& schedule,
                                            std::vector<double> weights);
};

struct OptimizationReport {
    AdaptedProcess allocation;  ///< discounted amounts per node, levels 1..depth
    double objective = 0.0;
    double gradient_norm = 0.0;  ///< sup-norm of the curvature-scaled gradient
    int iterations = 0;
};

/// Gradient ascent with backtracking line search on the terminal-eliminated
/// problem: free variables are the allocations on levels 1..depth-1, the
/// leaf allocation is whatever admissibility forces.  Starts from the even
/// spread E[w]/depth unless `initial` overrides it.  The gradient is scaled
/// by the local curvature (taken from differences of `derivative`), so the
/// convergence measure is the sup-norm of the diagonal Newton correction --
/// a distance to the optimum in allocation units, insensitive to how large
/// the marginal utilities get.  Throws ConvergenceError if that residual
/// does not reach `tolerance` within `max_iterations`.
OptimizationReport solve_allocation(const EventTree& tree, const UtilitySpec& utilities,
                                    const TerminalRisk& w, double tolerance = 1e-10,
                                    int max_iterations = 100000,
                                    const AdaptedProcess* initial = nullptr);

struct FirstOrderCheck {
    bool pass = false;
    double max_residual = 0.0;
};

/// Martingale test of optimality: at every interior node the conditional
/// expectation of next-period marginal utility must equal the node's own
/// marginal utility.  `allocation` holds discounted amounts.
FirstOrderCheck check_first_order(const EventTree& tree, const UtilitySpec& utilities,
                                  const AdaptedProcess& allocation, double tolerance = 1e-9);

struct ParetoRecovery {
    bool pass = false;
    std::vector<double> weights;  ///< per-period weights, first normalized to 1
    double max_residual = 0.0;
};

/// Recover the per-period welfare weights under which `allocation` is
/// optimal: weight_t is the ratio of expected marginal utilities against
/// period 1, validated by the weighted martingale property.
ParetoRecovery recover_pareto_weights(const EventTree& tree, const UtilitySpec& utilities,
                                      const AdaptedProcess& allocation, double tolerance = 1e-6);

/// Randomized agreement fixture: tree, rates, schedule and terminal risk.
struct Fixture {
    EventTree tree;
    RateCurve rates;
    RiskAversionSchedule schedule;
    TerminalRisk w;
};

/// Draw a fixture: depth uniform in [1, max_depth], binary/ternary branching
/// with bounded-away-from-zero probabilities, alphas in [0.1, 5], rates in
/// [0, 0.1], leaf risks in [-2, 2].
Fixture random_fixture(std::mt19937_64& rng, int max_depth = 4);

/// Sectioned text form (tree / rates / alpha / w) for failure replay.
std::string serialize_fixture(const Fixture& fixture);
Fixture parse_fixture(const std::string& text);

}  // namespace riskalloc::oracle
