#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "riskalloc/exp_pricing.hpp"
#include "riskalloc/mortality_pricing.hpp"

using namespace riskalloc;

namespace {

// Two periods, unit death benefit in discounted terms, nothing on survival;
// even odds of dying each year and no interest.
struct EvenOdds {
    RiskAversionSchedule schedule{std::vector<double>{1.0, 1.0}};
    MortalityCurve mortality{std::vector<double>{0.5, 0.5}};
    ClaimProfile claim{std::vector<double>{1.0, 1.0, 0.0}};

    double log_h1() const { return std::log(0.5 * std::exp(1.0) + 0.5); }
    double log_h0() const {
        double h1 = 0.5 * std::exp(1.0) + 0.5;
        double inner = 0.5 * std::exp(0.5) + 0.5 * std::sqrt(h1);
        return 2.0 * std::log(inner);
    }
};

}  // namespace

TEST_CASE("term claims are death benefits in discounted units") {
    auto flat0 = RateCurve::flat(0.0, 3);
    std::vector<double> unit(3, 1.0);
    auto claim = term_claim(flat0, unit);
    CHECK(claim.term() == 3);
    for (int t = 1; t <= 3; ++t) CHECK(claim.on_death(t) == 1.0);
    CHECK(claim.on_survival() == 0.0);

    auto curve = RateCurve::flat(0.02, 3);
    auto discounted = term_claim(curve, unit);
    for (int t = 1; t <= 3; ++t)
        CHECK(discounted.on_death(t) ==
              doctest::Approx(std::pow(1.02, -t)).epsilon(1e-14));

    std::vector<double> front{100.0, 0.0};
    auto endow = term_claim(RateCurve::flat(0.02, 2), front, 0.0);
    CHECK(endow.on_death(1) == doctest::Approx(100.0 / 1.02).epsilon(1e-14));
    CHECK(endow.on_death(2) == 0.0);

    auto with_survival = term_claim(flat0, unit, 0.25);
    CHECK(with_survival.on_survival() == 0.25);

    CHECK_THROWS_AS(term_claim(RateCurve::flat(0.02, 2), unit), std::invalid_argument);
    CHECK_THROWS_AS(ClaimProfile({1.0}), std::invalid_argument);
    CHECK_THROWS_AS(ClaimProfile({1.0, std::nan("")}), std::invalid_argument);
}

TEST_CASE("premium recursion endpoints and the even-odds fixture") {
    EvenOdds fx;
    auto log_h = log_premium_recursion(fx.schedule, fx.mortality, fx.claim);
    REQUIRE(log_h.size() == 3);
    CHECK(log_h[2] == 0.0);
    CHECK(log_h[1] == doctest::Approx(fx.log_h1()).epsilon(1e-14));
    CHECK(log_h[0] == doctest::Approx(fx.log_h0()).epsilon(1e-14));
    CHECK(std::exp(log_h[1]) == doctest::Approx(1.85914091423).epsilon(1e-11));
    CHECK(std::exp(log_h[0]) == doctest::Approx(2.26837403113).epsilon(1e-11));

    // single period: explicit exponential-principle value
    RiskAversionSchedule one{std::vector<double>{1.0}};
    auto single = log_premium_recursion(one, MortalityCurve({0.5}), ClaimProfile({1.0, 0.0}));
    CHECK(single[0] == doctest::Approx(std::log((std::exp(1.0) + 1.0) / 2.0)).epsilon(1e-14));

    // zero claim prices at zero all the way down
    auto zero = log_premium_recursion(fx.schedule, fx.mortality, ClaimProfile({0.0, 0.0, 0.0}));
    for (double g : zero) CHECK(g == 0.0);
}

TEST_CASE("indifference premium report carries recursion trace and bounds") {
    EvenOdds fx;
    auto report = indifference_premium(fx.schedule, fx.mortality, fx.claim);
    CHECK(report.premium == doctest::Approx(fx.log_h0()).epsilon(1e-14));
    CHECK(report.premium == doctest::Approx(0.81906328899181).epsilon(1e-12));
    CHECK(report.expected_claim == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(report.max_claim == 1.0);
    CHECK(report.log_h.size() == 3);
    CHECK(report.premium > report.expected_claim);
    CHECK(report.premium < report.max_claim);
}

TEST_CASE("constant claims price at cost whatever the mortality") {
    RiskAversionSchedule schedule({0.7, 1.9, 1.2});
    MortalityCurve mortality({0.2, 0.7, 0.4});
    for (double c : {-0.5, 0.0, 2.25}) {
        auto report = indifference_premium(schedule, mortality, ClaimProfile({c, c, c, c}));
        CHECK(report.premium == doctest::Approx(c).epsilon(1e-12));
    }
}

TEST_CASE("degenerate survival still prices, it just stops being random") {
    RiskAversionSchedule schedule({1.0, 1.0});
    auto certain_death = indifference_premium(schedule, MortalityCurve({1.0, 0.5}),
                                              ClaimProfile({0.8, 0.3, 0.1}));
    CHECK(certain_death.premium == doctest::Approx(0.8).epsilon(1e-12));
    auto immortal = indifference_premium(schedule, MortalityCurve({0.0, 0.0}),
                                         ClaimProfile({0.8, 0.3, 0.1}));
    CHECK(immortal.premium == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("one-dimensional recursion agrees with the full tree engine") {
    RiskAversionSchedule schedule({1.3, 0.7, 2.0, 1.1});
    MortalityCurve mortality({0.3, 0.6, 0.2, 0.5});
    ClaimProfile claim({0.9, -0.3, 1.4, 0.2, 0.6});

    auto report = indifference_premium(schedule, mortality, claim);
    auto tree = death_time_tree(mortality);
    double tree_price = indifference_price(tree, schedule, claim_terminal_risk(claim));
    CHECK(report.premium == doctest::Approx(tree_price).epsilon(1e-12));

    // nodewise: the tree kernel of the negated claim collapses to the
    // one-dimensional trace (death locks in the claim, survival carries h_t)
    TerminalRisk negated = claim_terminal_risk(claim);
    for (double& v : negated.values) v = -v;
    auto kernel = log_risk_kernel(tree, schedule, negated);
    auto log_h = log_premium_recursion(schedule, mortality, claim);
    for (int t = 1; t <= 4; ++t) {
        double beta = schedule.beta(t);
        for (int dead = 1; dead <= t; ++dead)
            CHECK(kernel.at(t)[static_cast<std::size_t>(dead - 1)] ==
                  doctest::Approx(beta * claim.on_death(dead)).epsilon(1e-12));
        CHECK(kernel.at(t)[static_cast<std::size_t>(t)] ==
              doctest::Approx(beta * log_h[static_cast<std::size_t>(t)]).epsilon(1e-12));
    }
}

TEST_CASE("closed-form insurer allocation matches the even-odds hand calculation") {
    EvenOdds fx;
    auto rates = RateCurve::flat(0.0, 2);
    auto plan = premium_allocation(fx.schedule, fx.mortality, fx.claim, rates, 0.0);

    double H = fx.log_h0();
    double g1 = fx.log_h1();
    REQUIRE(plan.at(1).size() == 2);
    REQUIRE(plan.at(2).size() == 3);
    CHECK(plan.at(1)[0] == doctest::Approx(0.5 * H - 0.5).epsilon(1e-12));          // died year 1
    CHECK(plan.at(1)[1] == doctest::Approx(0.5 * H - 0.5 * g1).epsilon(1e-12));     // alive
    CHECK(plan.at(2)[0] == doctest::Approx(0.5 * H - 0.5).epsilon(1e-12));          // still dead
    CHECK(plan.at(2)[1] == doctest::Approx(0.5 * H - 1.0 + 0.5 * g1).epsilon(1e-12));
    CHECK(plan.at(2)[2] == doctest::Approx(0.5 * H + 0.5 * g1).epsilon(1e-12));     // survived
}

TEST_CASE("insurer allocation is the seller's optimal plan at wealth plus premium") {
    RiskAversionSchedule schedule({1.3, 0.7, 2.0});
    MortalityCurve mortality({0.3, 0.6, 0.2});
    ClaimProfile claim({0.9, -0.3, 1.4, 0.6});
    RateCurve rates({0.02, 0.05, 0.01});
    double wealth = 0.4;

    auto report = indifference_premium(schedule, mortality, claim);
    auto direct = premium_allocation(schedule, mortality, claim, rates, wealth);
    auto tree = death_time_tree(mortality);
    auto reference = selling_allocation(tree, rates, schedule, wealth + report.premium,
                                        claim_terminal_risk(claim));
    for (int t = 1; t <= 3; ++t) {
        REQUIRE(direct.at(t).size() == reference.at(t).size());
        for (std::size_t i = 0; i < direct.at(t).size(); ++i)
            CHECK(direct.at(t)[i] == doctest::Approx(reference.at(t)[i]).epsilon(1e-10));
    }

    // pathwise the discounted plan pays wealth + premium - claim
    for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
        double sum = 0.0;
        std::size_t node = leaf;
        for (int t = 3; t >= 1; --t) {
            sum += direct.at(t)[node] / rates.bond_price(t);
            node = tree.parent(t, node);
        }
        double owed = wealth + report.premium - claim_terminal_risk(claim).values[leaf];
        CHECK(sum == doctest::Approx(owed).epsilon(1e-10));
    }
}

TEST_CASE("no claim and no wealth means no payments; cash spreads by inverse aversion") {
    RiskAversionSchedule schedule({1.1, 0.6});
    MortalityCurve mortality({0.4, 0.3});
    ClaimProfile zero({0.0, 0.0, 0.0});
    auto rates = RateCurve::flat(0.0, 2);

    auto nothing = premium_allocation(schedule, mortality, zero, rates, 0.0);
    for (int t = 1; t <= 2; ++t)
        for (double v : nothing.at(t)) CHECK(std::abs(v) < 1e-14);

    double x = 2.1;
    auto cash = premium_allocation(schedule, mortality, zero, rates, x);
    for (int t = 1; t <= 2; ++t)
        for (double v : cash.at(t))
            CHECK(v == doctest::Approx(schedule.beta(1) / schedule.alpha(t) * x).epsilon(1e-12));
}

TEST_CASE("equivalence premium discounts expected death benefits") {
    CHECK(equivalence_premium(RateCurve::flat(0.02, 1), MortalityCurve({0.01})) ==
          doctest::Approx(0.01 / 1.02).epsilon(1e-14));
    CHECK(equivalence_premium(RateCurve::flat(0.0, 2), MortalityCurve({0.5, 0.5})) ==
          doctest::Approx(0.75).epsilon(1e-14));
    CHECK(equivalence_premium(RateCurve::flat(0.0, 1), MortalityCurve({1.0})) == 1.0);
    CHECK(equivalence_premium(RateCurve::flat(0.03, 3), MortalityCurve({0.0, 0.0, 0.0})) == 0.0);

    std::vector<double> benefits{2.0};
    CHECK(equivalence_premium(RateCurve::flat(0.02, 1), MortalityCurve({0.01}), benefits) ==
          doctest::Approx(0.02 / 1.02).epsilon(1e-14));
}

TEST_CASE("loaded premium adds a standard deviation margin per period") {
    double expected = (0.01 + 0.01 * std::sqrt(0.01 * 0.99)) / 1.02;
    CHECK(loaded_premium(RateCurve::flat(0.02, 1), MortalityCurve({0.01})) ==
          doctest::Approx(expected).epsilon(1e-14));
    CHECK(loaded_premium(RateCurve::flat(0.02, 1), MortalityCurve({0.01})) ==
          doctest::Approx(0.010779399448143745).epsilon(1e-12));

    auto curve = RateCurve::flat(0.02, 2);
    MortalityCurve mortality({0.1, 0.2});
    CHECK(loaded_premium(curve, mortality, 0.0) ==
          doctest::Approx(equivalence_premium(curve, mortality)).epsilon(1e-14));
    CHECK(loaded_premium(curve, mortality) > equivalence_premium(curve, mortality));
    CHECK(loaded_premium(RateCurve::flat(0.0, 1), MortalityCurve({1.0})) == 1.0);
    CHECK_THROWS_AS(loaded_premium(curve, mortality, -0.1), std::domain_error);
}

TEST_CASE("premium bounds are the expected and the worst claim") {
    EvenOdds fx;
    auto bounds = premium_bounds(fx.mortality, fx.claim);
    CHECK(bounds.lower == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(bounds.upper == 1.0);

    auto flat = premium_bounds(MortalityCurve({0.3, 0.3}), ClaimProfile({2.0, 2.0, 2.0}));
    CHECK(flat.lower == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(flat.upper == 2.0);

    auto immortal = premium_bounds(MortalityCurve({0.0, 0.0}), ClaimProfile({5.0, 5.0, 0.0}));
    CHECK(immortal.lower == 0.0);
    CHECK(immortal.upper == 5.0);
}

TEST_CASE("scaling risk aversion sweeps the premium between its bounds") {
    EvenOdds fx;
    auto limits = limit_premiums(fx.mortality, fx.claim);
    CHECK(limits.zero_aversion == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(limits.infinite_aversion == 1.0);

    auto small = indifference_premium(fx.schedule.scaled(1e-5), fx.mortality, fx.claim);
    CHECK(small.premium == doctest::Approx(0.75).epsilon(1e-4));
    auto large = indifference_premium(fx.schedule.scaled(1e5), fx.mortality, fx.claim);
    CHECK(large.premium == doctest::Approx(1.0).epsilon(1e-3));

    auto zero = limit_premiums(MortalityCurve({0.2, 0.4}), ClaimProfile({0.0, 0.0, 0.0}));
    CHECK(zero.zero_aversion == 0.0);
    CHECK(zero.infinite_aversion == 0.0);

    CHECK_THROWS_AS(limit_premiums(MortalityCurve({0.0, 0.5}), fx.claim), std::domain_error);
    CHECK_THROWS_AS(limit_premiums(MortalityCurve({0.5, 1.0}), fx.claim), std::domain_error);
}

TEST_CASE("limiting premium equals the expected claim on assorted curves") {
    RiskAversionSchedule schedule({0.9, 1.4, 2.2});
    MortalityCurve mortality({0.15, 0.45, 0.3});
    ClaimProfile claim({1.2, 0.1, -0.4, 0.9});
    auto limits = limit_premiums(mortality, claim);
    auto bounds = premium_bounds(mortality, claim);
    CHECK(limits.zero_aversion == doctest::Approx(bounds.lower).epsilon(1e-14));
    CHECK(limits.infinite_aversion == bounds.upper);
}

TEST_CASE("scale solving hits a requested premium exactly") {
    EvenOdds fx;
    double base = indifference_premium(fx.schedule, fx.mortality, fx.claim).premium;

    double p_same = solve_scale(fx.schedule, fx.mortality, fx.claim, base);
    CHECK(p_same == doctest::Approx(1.0).epsilon(1e-6));

    for (double target : {0.78, 0.9, 0.99}) {
        double p = solve_scale(fx.schedule, fx.mortality, fx.claim, target);
        double achieved = indifference_premium(fx.schedule.scaled(p), fx.mortality, fx.claim).premium;
        CHECK(std::abs(achieved - target) < 1e-10);
    }

    CHECK_THROWS_AS(solve_scale(fx.schedule, fx.mortality, fx.claim, 0.75), std::domain_error);
    CHECK_THROWS_AS(solve_scale(fx.schedule, fx.mortality, fx.claim, 1.0), std::domain_error);
    CHECK_THROWS_AS(solve_scale(fx.schedule, fx.mortality, fx.claim, 0.4), std::domain_error);
    CHECK_THROWS_AS(solve_scale(fx.schedule, fx.mortality, fx.claim, 1.6), std::domain_error);
    CHECK_THROWS_AS(
        solve_scale(fx.schedule, MortalityCurve({1.0, 0.5}), fx.claim, 0.9), std::domain_error);
}

TEST_CASE("mismatched horizons are rejected") {
    RiskAversionSchedule schedule({1.0, 1.0});
    MortalityCurve mortality({0.5, 0.5, 0.5});
    ClaimProfile claim({1.0, 1.0, 0.0});
    CHECK_THROWS_AS(log_premium_recursion(schedule, mortality, claim), std::invalid_argument);
    CHECK_THROWS_AS(premium_allocation(schedule, MortalityCurve({0.5, 0.5}), claim,
                                       RateCurve::flat(0.0, 1), 0.0),
                    std::invalid_argument);
}
