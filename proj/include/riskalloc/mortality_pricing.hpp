#pragma once

#include <span>
#include <vector>

#include "riskalloc/event_tree.hpp"
#include "riskalloc/mortality_curve.hpp"
#include "riskalloc/rate_curve.hpp"
#include "riskalloc/risk_aversion.hpp"

namespace riskalloc {

/// Insurance pricing on the survival tree.  Claims are written in discounted
/// (time-0) units: entry t-1 (t in [1, T]) is paid if death occurs in period
/// t, entry T if the insured survives the horizon.

/// Discounted claim amounts per death-time atom; size term + 1.
struct ClaimProfile {
    std::vector<double> discounted;

    explicit ClaimProfile(std::vector<double> values);

    int term() const noexcept { return static_cast<int>(discounted.size()) - 1; }

    /// Payment on death in period t (t in [1, term]).
    double on_death(int t) const { return discounted.at(static_cast<std::size_t>(t - 1)); }
    /// Payment on surviving the horizon.
    double on_survival() const { return discounted.back(); }
};

/// Term life claim: benefit_t / bond_price(t) on death in period t, plus a
/// survival payment already expressed in discounted units (0 for pure term
/// cover).
ClaimProfile term_claim(const RateCurve& rates, std::span<const double> benefits,
                        double survival_value = 0.0);

/// The claim as a terminal risk on death_time_tree(mortality): leaf order is
/// death in period 1..T, then survival.
TerminalRisk claim_terminal_risk(const ClaimProfile& claim);

/// Backward one-dimensional premium recursion.  Returns logs of the
/// aggregates h_0..h_T: log h_T is the survival payment, each step blends the
/// death payment against the continuation at exponent beta_t, and log h_0 is
/// the indifference premium.
std::vector<double> log_premium_recursion(const RiskAversionSchedule& schedule,
                                          const MortalityCurve& mortality,
                                          const ClaimProfile& claim);

struct PremiumReport {
    double premium = 0.0;
    std::vector<double> log_h;       ///< logs of the recursion aggregates, index 0..term
    double expected_claim = 0.0;     ///< lower premium bound
    double max_claim = 0.0;          ///< upper premium bound
};

/// Single indifference premium for the claim, with the recursion trace and
/// the model-free bounds.
PremiumReport indifference_premium(const RiskAversionSchedule& schedule,
                                   const MortalityCurve& mortality, const ClaimProfile& claim);

/// Closed-form optimal allocation of the insurer's position (initial wealth
/// `wealth` plus the premium, minus the claim) on the survival tree.
/// Undiscounted amounts, one per node, directly from the recursion trace.
AdaptedProcess premium_allocation(const RiskAversionSchedule& schedule,
                                  const MortalityCurve& mortality, const ClaimProfile& claim,
                                  const RateCurve& rates, double wealth);

/// Expected discounted death benefits (principle of equivalence).  Unit
/// benefits unless a per-period vector is supplied.
double equivalence_premium(const RateCurve& rates, const MortalityCurve& mortality,
                           std::span<const double> benefits = {});

/// Equivalence premium with a standard-deviation loading on each period's
/// death probability.
double loaded_premium(const RateCurve& rates, const MortalityCurve& mortality,
                      double loading = 0.01, std::span<const double> benefits = {});

struct PremiumBounds {
    double lower = 0.0;  ///< expected claim
    double upper = 0.0;  ///< largest claim amount
};

PremiumBounds premium_bounds(const MortalityCurve& mortality, const ClaimProfile& claim);

struct PremiumLimits {
    double zero_aversion = 0.0;      ///< premium as risk aversion shrinks to 0
    double infinite_aversion = 0.0;  ///< premium as risk aversion grows without bound
};

/// Limiting premiums along the scaling ray.  Requires interior death
/// probabilities; throws std::domain_error on a degenerate curve.
PremiumLimits limit_premiums(const MortalityCurve& mortality, const ClaimProfile& claim);

/// Find p > 0 with indifference premium of the claim under `schedule.scaled(p)`
/// equal to `target`.  The target must lie strictly between the expected and
/// the maximal claim; bracketed bisection, tolerance 1e-10 on the premium.
double solve_scale(const RiskAversionSchedule& schedule, const MortalityCurve& mortality,
                   const ClaimProfile& claim, double target);

}  // namespace riskalloc
