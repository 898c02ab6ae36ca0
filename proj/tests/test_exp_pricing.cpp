#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "riskalloc/exp_pricing.hpp"

using namespace riskalloc;

namespace {

EventTree coin_tree(double p_up) {
    TreeBuilder b;
    b.add_node(1, 0, p_up);
    b.add_node(1, 0, 1.0 - p_up);
    return b.build();
}

// Depth 3 binary tree with lopsided probabilities.
EventTree deep_tree() {
    TreeBuilder b;
    b.add_node(1, 0, 0.35);
    b.add_node(1, 0, 0.65);
    for (std::size_t n = 0; n < 2; ++n) {
        b.add_node(2, n, 0.6);
        b.add_node(2, n, 0.4);
    }
    for (std::size_t n = 0; n < 4; ++n) {
        b.add_node(3, n, 0.25);
        b.add_node(3, n, 0.75);
    }
    return b.build();
}

TerminalRisk wavy_risk(const EventTree& tree, double scale) {
    TerminalRisk w{std::vector<double>(tree.leaf_count(), 0.0)};
    for (std::size_t i = 0; i < w.values.size(); ++i)
        w.values[i] = scale * std::sin(2.3 * static_cast<double>(i) + 0.4);
    return w;
}

}  // namespace

TEST_CASE("risk aversion schedule aggregates tail coefficients") {
    RiskAversionSchedule schedule({1.0, 1.0});
    CHECK(schedule.beta(1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(schedule.beta(2) == doctest::Approx(1.0).epsilon(1e-15));

    RiskAversionSchedule mixed({2.0, 1.0, 4.0});
    CHECK(mixed.beta(3) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(mixed.beta(2) == doctest::Approx(1.0 / (1.0 + 0.25)).epsilon(1e-15));
    CHECK(mixed.beta(1) == doctest::Approx(1.0 / (0.5 + 1.0 + 0.25)).epsilon(1e-15));

    CHECK_THROWS_AS(RiskAversionSchedule({1.0, 0.0}), std::domain_error);
    CHECK_THROWS_AS(RiskAversionSchedule({-2.0}), std::domain_error);
    CHECK_THROWS_AS(RiskAversionSchedule({}), std::invalid_argument);
    CHECK_THROWS_AS(schedule.alpha(3), std::out_of_range);
    CHECK_THROWS_AS(schedule.scaled(0.0), std::domain_error);
}

TEST_CASE("tail coefficients telescope") {
    RiskAversionSchedule schedule({0.7, 2.2, 1.1, 3.4, 0.5});
    for (int s = 1; s <= 5; ++s) {
        for (int t = s; t <= 5; ++t) {
            double sum = 0.0;
            for (int k = s; k < t; ++k)
                sum += schedule.beta(k) * schedule.beta(k + 1) / schedule.alpha(k);
            CHECK(schedule.beta(t) - sum == doctest::Approx(schedule.beta(s)).epsilon(1e-12));
        }
    }
}

TEST_CASE("utility is normalized at zero") {
    RiskAversionSchedule schedule({2.0, 0.5});
    CHECK(utility(schedule, 1, 0.0) == 0.0);
    CHECK(utility(schedule, 2, 0.0) == 0.0);
    CHECK(marginal_utility(schedule, 1, 0.0) == 1.0);
    CHECK(utility(schedule, 1, 1.0) == doctest::Approx(0.5 * (1.0 - std::exp(-2.0))).epsilon(1e-15));
    // increasing and concave
    double prev = utility(schedule, 1, -2.0);
    double prev_slope = 1e300;
    for (double x = -1.5; x < 2.1; x += 0.5) {
        double u = utility(schedule, 1, x);
        double slope = (u - prev) / 0.5;
        CHECK(u > prev);
        CHECK(slope < prev_slope);
        prev = u;
        prev_slope = slope;
    }
}

TEST_CASE("kernel of a constant risk is exponential in the tail coefficient") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.3, 0.8, 2.1});
    for (double x : {-1.0, 0.0, 2.5}) {
        auto logs = log_risk_kernel(tree, schedule, TerminalRisk::constant(tree, x));
        for (int t = 1; t <= 3; ++t) {
            for (double v : logs.at(t))
                CHECK(v == doctest::Approx(-schedule.beta(t) * x).epsilon(1e-12));
        }
    }
}

TEST_CASE("kernel of a single coin flip") {
    auto tree = coin_tree(0.5);
    RiskAversionSchedule schedule({1.0});
    auto logs = log_risk_kernel(tree, schedule, TerminalRisk{{1.0, 0.0}});
    REQUIRE(logs.at(1).size() == 2);
    CHECK(logs.at(1)[0] == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(logs.at(1)[1] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("adding cash shifts the kernel without reshaping it") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({0.6, 1.7, 1.1});
    auto z = wavy_risk(tree, 1.4);
    double x = 0.85;
    TerminalRisk shifted = z;
    for (double& v : shifted.values) v += x;

    auto base = log_risk_kernel(tree, schedule, z);
    auto moved = log_risk_kernel(tree, schedule, shifted);
    for (int t = 1; t <= 3; ++t) {
        for (std::size_t i = 0; i < base.at(t).size(); ++i)
            CHECK(moved.at(t)[i] ==
                  doctest::Approx(base.at(t)[i] - schedule.beta(t) * x).epsilon(1e-12));
    }
}

TEST_CASE("marginal martingale really is a martingale with the right product") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({0.9, 2.4, 1.5});
    auto w = wavy_risk(tree, 1.8);
    auto log_m = log_marginal_martingale(tree, schedule, w);

    // conditional expectations step back one level
    for (int t = 3; t >= 2; --t) {
        std::vector<double> m(log_m.at(t).size());
        for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::exp(log_m.at(t)[i]);
        auto back = conditional_expectation(tree, m, t, t - 1);
        for (std::size_t i = 0; i < back.size(); ++i)
            CHECK(back[i] == doctest::Approx(std::exp(log_m.at(t - 1)[i])).epsilon(1e-12));
    }

    // pathwise: sum_t log(M_t)/alpha_t = -w
    for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
        double sum = 0.0;
        std::size_t node = leaf;
        for (int t = 3; t >= 1; --t) {
            sum += log_m.at(t)[node] / schedule.alpha(t);
            node = tree.parent(t, node);
        }
        CHECK(sum == doctest::Approx(-w.values[leaf]).epsilon(1e-12));
    }

    // constant risk: the martingale is flat at exp(-beta_1 x)
    double x = -0.6;
    auto flat = log_marginal_martingale(tree, schedule, TerminalRisk::constant(tree, x));
    for (int t = 1; t <= 3; ++t)
        for (double v : flat.at(t))
            CHECK(v == doctest::Approx(-schedule.beta(1) * x).epsilon(1e-12));

    // zero risk: martingale identically one
    auto zero = log_marginal_martingale(tree, schedule, TerminalRisk::constant(tree, 0.0));
    for (int t = 1; t <= 3; ++t)
        for (double v : zero.at(t)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("optimal allocation spreads constants by inverse risk aversion") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.2, 0.4, 3.0});
    auto rates = RateCurve::flat(0.0, 3);
    double x = 1.75;
    auto plan = optimal_allocation(tree, rates, schedule, TerminalRisk::constant(tree, x));
    double total = 0.0;
    for (int t = 1; t <= 3; ++t) {
        double want = schedule.beta(1) / schedule.alpha(t) * x;
        for (double v : plan.at(t)) CHECK(v == doctest::Approx(want).epsilon(1e-12));
        total += plan.at(t)[0];
    }
    CHECK(total == doctest::Approx(x).epsilon(1e-12));

    auto zero = optimal_allocation(tree, rates, schedule, TerminalRisk::constant(tree, 0.0));
    for (int t = 1; t <= 3; ++t)
        for (double v : zero.at(t)) CHECK(std::abs(v) < 1e-14);
}

TEST_CASE("optimal allocation is admissible and undiscounts with the curve") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.2, 0.4, 3.0});
    RateCurve rates({0.02, 0.07, 0.01});
    auto w = wavy_risk(tree, 1.1);
    auto plan = optimal_allocation(tree, rates, schedule, w);

    for (std::size_t leaf = 0; leaf < tree.leaf_count(); ++leaf) {
        double sum = 0.0;
        std::size_t node = leaf;
        for (int t = 3; t >= 1; --t) {
            sum += plan.at(t)[node] / rates.bond_price(t);
            node = tree.parent(t, node);
        }
        CHECK(sum == doctest::Approx(w.values[leaf]).epsilon(1e-11));
    }

    // discounted plan does not depend on the curve
    auto flat_plan = optimal_allocation(tree, RateCurve::flat(0.0, 3), schedule, w);
    for (int t = 1; t <= 3; ++t)
        for (std::size_t i = 0; i < plan.at(t).size(); ++i)
            CHECK(plan.at(t)[i] / rates.bond_price(t) ==
                  doctest::Approx(flat_plan.at(t)[i]).epsilon(1e-12));
}

TEST_CASE("maximal utility of a constant matches the single-period formula") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({0.8, 1.9, 1.4});
    CHECK(utility_value(tree, schedule, TerminalRisk::constant(tree, 0.0)) == doctest::Approx(0.0));
    for (double x : {-1.2, 0.4, 2.0}) {
        double b1 = schedule.beta(1);
        double want = (1.0 - std::exp(-b1 * x)) / b1;
        CHECK(utility_value(tree, schedule, TerminalRisk::constant(tree, x)) ==
              doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("maximal utility equals total expected utility of the optimal plan") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({0.8, 1.9, 1.4});
    auto rates = RateCurve::flat(0.0, 3);
    auto w = wavy_risk(tree, 1.6);
    auto plan = optimal_allocation(tree, rates, schedule, w);

    double total = 0.0;
    for (int t = 1; t <= 3; ++t) {
        std::vector<double> per_node(plan.at(t).size());
        for (std::size_t i = 0; i < per_node.size(); ++i)
            per_node[i] = utility(schedule, t, plan.at(t)[i]);
        total += expectation(tree, per_node, t);
    }
    CHECK(utility_value(tree, schedule, w) == doctest::Approx(total).epsilon(1e-10));
}

TEST_CASE("indifference price of a coin-flip liability") {
    auto tree = coin_tree(0.5);
    RiskAversionSchedule schedule({1.0});
    double price = indifference_price(tree, schedule, TerminalRisk{{1.0, 0.0}});
    CHECK(price == doctest::Approx(std::log((std::exp(1.0) + 1.0) / 2.0)).epsilon(1e-14));
    CHECK(price == doctest::Approx(0.620114507).epsilon(1e-9));
}

TEST_CASE("indifference price: constants and cash shifts") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.1, 0.7, 2.3});
    CHECK(std::abs(indifference_price(tree, schedule, TerminalRisk::constant(tree, 0.0))) < 1e-14);
    for (double c : {-0.8, 1.4})
        CHECK(indifference_price(tree, schedule, TerminalRisk::constant(tree, c)) ==
              doctest::Approx(c).epsilon(1e-12));

    auto z = wavy_risk(tree, 1.2);
    double base = indifference_price(tree, schedule, z);
    for (double c : {-0.9, 0.3, 7.0}) {
        TerminalRisk shifted = z;
        for (double& v : shifted.values) v += c;
        CHECK(indifference_price(tree, schedule, shifted) ==
              doctest::Approx(base + c).epsilon(1e-12));
    }
}

TEST_CASE("indifference price is monotone and convex and dominates the mean") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.1, 0.7, 2.3});
    auto z = wavy_risk(tree, 1.2);
    double base = indifference_price(tree, schedule, z);

    CHECK(base >= expectation(tree, z.values, 3) - 1e-12);

    TerminalRisk bigger = z;
    bigger.values[3] += 0.25;  // positive bump on a positive-probability leaf
    CHECK(indifference_price(tree, schedule, bigger) > base + 1e-9);

    auto w = wavy_risk(tree, 0.7);
    for (double& v : w.values) v += 0.2;
    double pw = indifference_price(tree, schedule, w);
    for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        TerminalRisk mix = z;
        for (std::size_t i = 0; i < mix.values.size(); ++i)
            mix.values[i] = a * z.values[i] + (1.0 - a) * w.values[i];
        CHECK(indifference_price(tree, schedule, mix) <= a * base + (1.0 - a) * pw + 1e-12);
    }
}

TEST_CASE("price never explodes: extreme aversion stays within the risk's range") {
    auto tree = deep_tree();
    auto z = wavy_risk(tree, 1.9);
    double lo = *std::min_element(z.values.begin(), z.values.end());
    double hi = *std::max_element(z.values.begin(), z.values.end());
    for (double a : {1e-6, 1e-2, 1.0, 1e2, 1e6}) {
        double p = indifference_price(tree, RiskAversionSchedule::constant(a, 3), z);
        CHECK(p >= lo - 1e-9);
        CHECK(p <= hi + 1e-9);
        CHECK(std::isfinite(p));
    }
}

TEST_CASE("seller's plan equals the optimal plan of wealth minus claim") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.4, 0.5, 2.2});
    RateCurve rates({0.03, 0.01, 0.05});
    auto z = wavy_risk(tree, 1.3);
    double wealth = 0.9;

    auto direct = selling_allocation(tree, rates, schedule, wealth, z);
    TerminalRisk combined = z;
    for (double& v : combined.values) v = wealth - v;
    auto reference = optimal_allocation(tree, rates, schedule, combined);

    for (int t = 1; t <= 3; ++t)
        for (std::size_t i = 0; i < direct.at(t).size(); ++i)
            CHECK(direct.at(t)[i] == doctest::Approx(reference.at(t)[i]).epsilon(1e-10));
}

TEST_CASE("seller's plan without claim or wealth is zero, constants spread as usual") {
    auto tree = deep_tree();
    RiskAversionSchedule schedule({1.4, 0.5, 2.2});
    auto rates = RateCurve::flat(0.0, 3);

    auto nothing = selling_allocation(tree, rates, schedule, 0.0, TerminalRisk::constant(tree, 0.0));
    for (int t = 1; t <= 3; ++t)
        for (double v : nothing.at(t)) CHECK(std::abs(v) < 1e-14);

    double x = 1.3;
    auto cash_only = selling_allocation(tree, rates, schedule, x, TerminalRisk::constant(tree, 0.0));
    for (int t = 1; t <= 3; ++t)
        for (double v : cash_only.at(t))
            CHECK(v == doctest::Approx(schedule.beta(1) / schedule.alpha(t) * x).epsilon(1e-12));
}

TEST_CASE("pricing inputs are validated") {
    auto tree = deep_tree();
    RiskAversionSchedule good({1.0, 1.0, 1.0});
    RiskAversionSchedule shorter({1.0, 1.0});
    TerminalRisk w = TerminalRisk::constant(tree, 0.0);

    CHECK_THROWS_AS(log_risk_kernel(tree, shorter, w), std::invalid_argument);
    TerminalRisk wrong{std::vector<double>(3, 0.0)};
    CHECK_THROWS_AS(log_risk_kernel(tree, good, wrong), std::invalid_argument);
    TerminalRisk nan_risk = w;
    nan_risk.values[2] = std::nan("");
    CHECK_THROWS_AS(log_risk_kernel(tree, good, nan_risk), std::invalid_argument);
    CHECK_THROWS_AS(optimal_allocation(tree, RateCurve::flat(0.02, 2), good, w),
                    std::invalid_argument);
}
