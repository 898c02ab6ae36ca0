#include "riskalloc/mortality_pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "riskalloc/errors.hpp"

namespace riskalloc {

namespace {

void check_horizons(const RiskAversionSchedule& schedule, const MortalityCurve& mortality,
                    const ClaimProfile& claim) {
    if (schedule.term() != mortality.term() || claim.term() != mortality.term())
        throw std::invalid_argument("schedule, mortality and claim must share one horizon");
}

void check_benefits(const MortalityCurve& mortality, std::span<const double>& benefits,
                    const std::vector<double>& unit) {
    if (benefits.empty()) {
        benefits = unit;
        return;
    }
    if (static_cast<int>(benefits.size()) != mortality.term())
        throw std::invalid_argument("benefit vector must cover every period");
}

// log(q * exp(a) + p * exp(b)), max-shifted; q or p may be zero.
double log_blend(double q, double a, double p, double b) {
    double la = std::log(q) + a;
    double lb = std::log(p) + b;
    double m = std::max(la, lb);
    return m + std::log(std::exp(la - m) + std::exp(lb - m));
}

}  // namespace

ClaimProfile::ClaimProfile(std::vector<double> values) : discounted(std::move(values)) {
    if (discounted.size() < 2)
        throw std::invalid_argument("claim profile needs death and survival amounts");
    for (double v : discounted) {
        if (!std::isfinite(v)) throw std::invalid_argument("claim amounts must be finite");
    }
}

ClaimProfile term_claim(const RateCurve& rates, std::span<const double> benefits,
                        double survival_value) {
    if (benefits.empty()) throw std::invalid_argument("term claim needs >= 1 benefit");
    int term = static_cast<int>(benefits.size());
    if (rates.term() < term) throw std::invalid_argument("rate curve shorter than the benefit term");
    if (!std::isfinite(survival_value))
        throw std::invalid_argument("survival value must be finite");

    std::vector<double> z(static_cast<std::size_t>(term) + 1, survival_value);
    for (int t = 1; t <= term; ++t)
        z[static_cast<std::size_t>(t - 1)] =
            rates.discount(benefits[static_cast<std::size_t>(t - 1)], t);
    return ClaimProfile(std::move(z));
}

TerminalRisk claim_terminal_risk(const ClaimProfile& claim) {
    return TerminalRisk{claim.discounted};
}

std::vector<double> log_premium_recursion(const RiskAversionSchedule& schedule,
                                          const MortalityCurve& mortality,
                                          const ClaimProfile& claim) {
    check_horizons(schedule, mortality, claim);
    int term = mortality.term();

    std::vector<double> log_h(static_cast<std::size_t>(term) + 1);
    log_h[static_cast<std::size_t>(term)] = claim.on_survival();
    for (int t = term; t >= 1; --t) {
        double beta = schedule.beta(t);
        double q = mortality.conditional_death_prob(t);
        double blended = log_blend(q, beta * claim.on_death(t),
                                   1.0 - q, beta * log_h[static_cast<std::size_t>(t)]);
        log_h[static_cast<std::size_t>(t - 1)] = blended / beta;
    }
    return log_h;
}

PremiumReport indifference_premium(const RiskAversionSchedule& schedule,
                                   const MortalityCurve& mortality, const ClaimProfile& claim) {
    PremiumReport report;
    report.log_h = log_premium_recursion(schedule, mortality, claim);
    report.premium = report.log_h.front();
    auto bounds = premium_bounds(mortality, claim);
    report.expected_claim = bounds.lower;
    report.max_claim = bounds.upper;
    return report;
}

AdaptedProcess premium_allocation(const RiskAversionSchedule& schedule,
                                  const MortalityCurve& mortality, const ClaimProfile& claim,
                                  const RateCurve& rates, double wealth) {
    check_horizons(schedule, mortality, claim);
    int term = mortality.term();
    if (rates.term() < term) throw std::invalid_argument("rate curve shorter than the horizon");
    if (!std::isfinite(wealth)) throw std::invalid_argument("wealth must be finite");

    auto log_h = log_premium_recursion(schedule, mortality, claim);
    double funded = schedule.beta(1) * (wealth + log_h.front());

    // carried[j]: kernel history of surviving periods 1..j
    std::vector<double> carried(static_cast<std::size_t>(term), 0.0);
    for (int k = 1; k < term; ++k)
        carried[static_cast<std::size_t>(k)] =
            carried[static_cast<std::size_t>(k - 1)] +
            schedule.beta(k + 1) / schedule.alpha(k) * schedule.beta(k) *
                log_h[static_cast<std::size_t>(k)];

    auto tree = death_time_tree(mortality);
    AdaptedProcess plan = AdaptedProcess::zeros(tree);
    for (int t = 1; t <= term; ++t) {
        double scale = rates.bond_price(t) / schedule.alpha(t);
        for (int dead = 1; dead <= t; ++dead) {
            double value = funded - schedule.beta(dead) * claim.on_death(dead) +
                           carried[static_cast<std::size_t>(dead - 1)];
            plan.at(t)[static_cast<std::size_t>(dead - 1)] = scale * value;
        }
        double alive = funded - schedule.beta(t) * log_h[static_cast<std::size_t>(t)] +
                       carried[static_cast<std::size_t>(t - 1)];
        plan.at(t)[static_cast<std::size_t>(t)] = scale * alive;
    }
    return plan;
}

double equivalence_premium(const RateCurve& rates, const MortalityCurve& mortality,
                           std::span<const double> benefits) {
    if (rates.term() < mortality.term())
        throw std::invalid_argument("rate curve shorter than the horizon");
    std::vector<double> unit(static_cast<std::size_t>(mortality.term()), 1.0);
    check_benefits(mortality, benefits, unit);

    double total = 0.0;
    for (int t = 1; t <= mortality.term(); ++t)
        total += rates.discount(benefits[static_cast<std::size_t>(t - 1)], t) *
                 mortality.death_prob(t);
    return total;
}

double loaded_premium(const RateCurve& rates, const MortalityCurve& mortality, double loading,
                      std::span<const double> benefits) {
    if (!std::isfinite(loading) || loading < 0.0)
        throw std::domain_error("loading must be a nonnegative number");
    if (rates.term() < mortality.term())
        throw std::invalid_argument("rate curve shorter than the horizon");
    std::vector<double> unit(static_cast<std::size_t>(mortality.term()), 1.0);
    check_benefits(mortality, benefits, unit);

    double total = 0.0;
    for (int t = 1; t <= mortality.term(); ++t) {
        double q = mortality.death_prob(t);
        double padded = q + loading * std::sqrt(q * (1.0 - q));
        total += rates.discount(benefits[static_cast<std::size_t>(t - 1)], t) * padded;
    }
    return total;
}

PremiumBounds premium_bounds(const MortalityCurve& mortality, const ClaimProfile& claim) {
    if (claim.term() != mortality.term())
        throw std::invalid_argument("mortality and claim must share one horizon");

    double expected = mortality.survival_prob() * claim.on_survival();
    for (int t = 1; t <= mortality.term(); ++t)
        expected += mortality.death_prob(t) * claim.on_death(t);
    double worst = *std::max_element(claim.discounted.begin(), claim.discounted.end());
    return {expected, worst};
}

PremiumLimits limit_premiums(const MortalityCurve& mortality, const ClaimProfile& claim) {
    if (claim.term() != mortality.term())
        throw std::invalid_argument("mortality and claim must share one horizon");
    if (mortality.degenerate())
        throw std::domain_error("limits need death probabilities strictly inside (0, 1)");

    // vanishing risk aversion: the blend collapses to conditional expectation
    double value = claim.on_survival();
    for (int t = mortality.term(); t >= 1; --t) {
        double q = mortality.conditional_death_prob(t);
        value = q * claim.on_death(t) + (1.0 - q) * value;
    }
    double worst = *std::max_element(claim.discounted.begin(), claim.discounted.end());
    return {value, worst};
}

double solve_scale(const RiskAversionSchedule& schedule, const MortalityCurve& mortality,
                   const ClaimProfile& claim, double target) {
    check_horizons(schedule, mortality, claim);
    auto limits = limit_premiums(mortality, claim);  // also rejects degenerate curves
    if (!std::isfinite(target) || target <= limits.zero_aversion ||
        target >= limits.infinite_aversion)
        throw std::domain_error(
            "target premium must lie strictly between the expected and the maximal claim");

    auto premium_at = [&](double p) {
        return indifference_premium(schedule.scaled(p), mortality, claim).premium - target;
    };

    double lo = 1e-6;
    double hi = 1e6;
    while (premium_at(lo) > 0.0 && lo > 1e-12) lo /= 10.0;
    while (premium_at(hi) < 0.0 && hi < 1e12) hi *= 10.0;

    double f_lo = premium_at(lo);
    double f_hi = premium_at(hi);
    if (f_lo > 0.0 || f_hi < 0.0)
        throw ConvergenceError("scale search could not bracket the target premium", 0,
                               std::min(std::abs(f_lo), std::abs(f_hi)));

    constexpr int kMaxBisections = 400;
    for (int it = 0; it < kMaxBisections; ++it) {
        double mid = std::sqrt(lo * hi);  // bisect the exponent of the bracket
        double f_mid = premium_at(mid);
        if (std::abs(f_mid) < 1e-10) return mid;
        if (f_mid < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    throw ConvergenceError("scale search did not reach the premium tolerance", kMaxBisections,
                           std::abs(premium_at(std::sqrt(lo * hi))));
}

}  // namespace riskalloc
