#pragma once

#include "riskalloc/event_tree.hpp"
#include "riskalloc/rate_curve.hpp"
#include "riskalloc/risk_aversion.hpp"

namespace riskalloc {

/// Pricing engine for intertemporal allocation of a terminal risk under
/// exponential utility.  All recursions run in log space: a level-t entry of
/// a "log_*" process is the natural log of the positive quantity it names.
///
/// Wealth conventions: `w` and allocations returned by the *_allocation
/// functions live on the tree's node grid; discounted amounts (time-0 units)
/// are undiscounted through RateCurve::bond_price per level.

/// Backward aggregation kernel of a terminal risk.
///
/// Level depth holds -alpha_T * w per leaf; walking one level back takes the
/// conditional expectation of the exponentiated values and rescales the
/// exponent by beta_{t-1}/beta_t.  Every pricing quantity below derives from
/// this process.  Constant risks aggregate to -beta_t * w at every node.
AdaptedProcess log_risk_kernel(const EventTree& tree, const RiskAversionSchedule& schedule,
                               const TerminalRisk& w);

/// Log of the marginal-utility martingale induced by the kernel: the unique
/// positive martingale M with sum_t log(M_t)/alpha_t = -w along every path.
/// At the optimum, M_t equals u_t'(discounted allocation).
AdaptedProcess log_marginal_martingale(const EventTree& tree, const RiskAversionSchedule& schedule,
                                       const TerminalRisk& w);

/// Utility-maximal intertemporal allocation of the terminal risk `w`
/// (undiscounted payment amounts, one per node on levels 1..depth).
AdaptedProcess optimal_allocation(const EventTree& tree, const RateCurve& rates,
                                  const RiskAversionSchedule& schedule, const TerminalRisk& w);

/// Maximal total expected utility attainable by allocating `w`.
double utility_value(const EventTree& tree, const RiskAversionSchedule& schedule,
                     const TerminalRisk& w);

/// Indifference price of a terminal claim: the premium whose receipt exactly
/// compensates taking on the obligation to pay `z`, independent of initial
/// wealth.  Satisfies E[z] <= price and price(z + c) = price(z) + c.
double indifference_price(const EventTree& tree, const RiskAversionSchedule& schedule,
                          const TerminalRisk& z);

/// Optimal allocation of the seller's position: initial wealth plus premium
/// income minus the claim `z`.  `wealth` is in discounted (time-0) units and
/// already includes the premium.  Equals optimal_allocation of the combined
/// terminal risk but is computed directly from the kernel of -z.
AdaptedProcess selling_allocation(const EventTree& tree, const RateCurve& rates,
                                  const RiskAversionSchedule& schedule, double wealth,
                                  const TerminalRisk& z);

}  // namespace riskalloc
