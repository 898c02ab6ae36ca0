// Python bindings for the premium engine.  The surface stays deliberately
// plain: lists and floats in, floats / lists / dicts out, so the module can
// be driven from notebooks without wrapping any C++ types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "riskalloc/calibration.hpp"
#include "riskalloc/event_tree.hpp"
#include "riskalloc/exp_pricing.hpp"
#include "riskalloc/mortality_curve.hpp"
#include "riskalloc/mortality_pricing.hpp"
#include "riskalloc/rate_curve.hpp"
#include "riskalloc/risk_aversion.hpp"

namespace py = pybind11;

namespace {

struct Contract {
    riskalloc::RiskAversionSchedule schedule;
    riskalloc::MortalityCurve mortality;
    riskalloc::RateCurve rates;
    riskalloc::ClaimProfile claim;
};

Contract make_contract(std::vector<double> alphas, std::vector<double> death_probs,
                       std::vector<double> rates_in,
                       const std::optional<std::vector<double>>& benefits, double survival) {
    riskalloc::RiskAversionSchedule schedule(std::move(alphas));
    riskalloc::MortalityCurve mortality(std::move(death_probs));
    riskalloc::RateCurve rates(std::move(rates_in));
    const std::vector<double> amounts =
        benefits ? *benefits
                 : std::vector<double>(static_cast<std::size_t>(mortality.term()), 1.0);
    riskalloc::ClaimProfile claim = riskalloc::term_claim(rates, amounts, survival);
    return Contract{std::move(schedule), std::move(mortality), std::move(rates),
                    std::move(claim)};
}

py::dict premium(std::vector<double> alphas, std::vector<double> death_probs,
                 std::vector<double> rates, std::optional<std::vector<double>> benefits,
                 double survival) {
    const Contract c = make_contract(std::move(alphas), std::move(death_probs), std::move(rates),
                                     benefits, survival);
    const riskalloc::PremiumReport report =
        riskalloc::indifference_premium(c.schedule, c.mortality, c.claim);
    py::dict out;
    out["premium"] = report.premium;
    out["expected_claim"] = report.expected_claim;
    out["max_claim"] = report.max_claim;
    out["log_h"] = report.log_h;
    return out;
}

double equivalence(std::vector<double> death_probs, std::vector<double> rates,
                   std::optional<std::vector<double>> benefits) {
    const riskalloc::MortalityCurve mortality(std::move(death_probs));
    const riskalloc::RateCurve curve(std::move(rates));
    if (benefits) return riskalloc::equivalence_premium(curve, mortality, *benefits);
    return riskalloc::equivalence_premium(curve, mortality);
}

double loaded(std::vector<double> death_probs, std::vector<double> rates, double loading,
              std::optional<std::vector<double>> benefits) {
    const riskalloc::MortalityCurve mortality(std::move(death_probs));
    const riskalloc::RateCurve curve(std::move(rates));
    if (benefits) return riskalloc::loaded_premium(curve, mortality, loading, *benefits);
    return riskalloc::loaded_premium(curve, mortality, loading);
}

std::vector<double> curve_by_term(double a, double b, std::vector<double> death_probs,
                                  std::vector<double> rates, std::optional<int> max_term) {
    const riskalloc::MortalityCurve mortality(std::move(death_probs));
    const riskalloc::RateCurve curve(std::move(rates));
    const int horizon = max_term ? *max_term : mortality.term();
    return riskalloc::premium_curve(riskalloc::AlphaFamily{a, b}, mortality, curve, horizon);
}

py::dict fit(std::vector<double> target, std::vector<double> death_probs,
             std::vector<double> rates, std::pair<double, double> initial, bool fit_b,
             bool multi_start) {
    const riskalloc::MortalityCurve mortality(std::move(death_probs));
    const riskalloc::RateCurve curve(std::move(rates));
    riskalloc::FitOptions options;
    options.fit_b = fit_b;
    options.multi_start = multi_start;
    const riskalloc::FitReport report =
        riskalloc::fit_alpha(target, mortality, curve,
                             riskalloc::AlphaFamily{initial.first, initial.second}, options);
    py::dict out;
    out["a"] = report.family.a;
    out["b"] = report.family.b;
    out["rss"] = report.rss;
    out["residuals"] = report.residuals;
    out["iterations"] = report.iterations;
    return out;
}

double scale_for_target(std::vector<double> alphas, std::vector<double> death_probs,
                        std::vector<double> rates, double target,
                        std::optional<std::vector<double>> benefits, double survival) {
    const Contract c = make_contract(std::move(alphas), std::move(death_probs), std::move(rates),
                                     benefits, survival);
    return riskalloc::solve_scale(c.schedule, c.mortality, c.claim, target);
}

py::dict allocation(std::vector<double> alphas, std::vector<double> death_probs,
                    std::vector<double> rates, double wealth,
                    std::optional<std::vector<double>> benefits, double survival) {
    const Contract c = make_contract(std::move(alphas), std::move(death_probs), std::move(rates),
                                     benefits, survival);
    const riskalloc::AdaptedProcess plan =
        riskalloc::premium_allocation(c.schedule, c.mortality, c.claim, c.rates, wealth);
    std::vector<std::vector<double>> paid;
    std::vector<std::vector<double>> discounted;
    for (int t = 1; t <= c.mortality.term(); ++t) {
        paid.push_back(plan.at(t));
        std::vector<double> level = plan.at(t);
        for (double& x : level) x /= c.rates.bond_price(t);
        discounted.push_back(std::move(level));
    }
    py::dict out;
    out["paid"] = paid;
    out["discounted"] = discounted;
    return out;
}

double tree_price(const std::string& tree_text, std::vector<double> alphas,
                  std::vector<double> terminal) {
    const riskalloc::EventTree tree = riskalloc::EventTree::from_text(tree_text);
    const riskalloc::RiskAversionSchedule schedule(std::move(alphas));
    return riskalloc::indifference_price(tree, schedule,
                                         riskalloc::TerminalRisk{std::move(terminal)});
}

}  // namespace

PYBIND11_MODULE(_riskalloc, m) {
    m.doc() = "Exponential-utility premiums for multi-period insurance contracts";

    m.def("premium", &premium, py::arg("alphas"), py::arg("death_probs"), py::arg("rates"),
          py::arg("benefits") = std::nullopt, py::arg("survival") = 0.0,
          "Indifference premium of a term contract.  `alphas`, `death_probs` and `rates` are\n"
          "per-period lists of equal length T; `benefits` defaults to a unit payment on death\n"
          "and `survival` is an extra discounted payment on surviving the horizon.  Returns a\n"
          "dict with the premium, the expected and maximal discounted claim, and the logs of\n"
          "the backward recursion aggregates.");
    m.def("equivalence_premium", &equivalence, py::arg("death_probs"), py::arg("rates"),
          py::arg("benefits") = std::nullopt,
          "Expected discounted death benefits (principle of equivalence).");
    m.def("loaded_premium", &loaded, py::arg("death_probs"), py::arg("rates"),
          py::arg("loading") = 0.01, py::arg("benefits") = std::nullopt,
          "Equivalence premium with a standard-deviation loading on each death probability.");
    m.def("premium_curve", &curve_by_term, py::arg("a"), py::arg("b"), py::arg("death_probs"),
          py::arg("rates"), py::arg("max_term") = std::nullopt,
          "Unit-benefit premiums for horizons 1..max_term under the risk aversion term\n"
          "structure alpha(t) = a + b * sqrt(t).");
    m.def("fit_alpha", &fit, py::arg("target"), py::arg("death_probs"), py::arg("rates"),
          py::arg("initial") = std::pair<double, double>{1.0, 0.1}, py::arg("fit_b") = true,
          py::arg("multi_start") = false,
          "Least-squares fit of alpha(t) = a + b * sqrt(t) to a premium-by-horizon target.");
    m.def("solve_scale", &scale_for_target, py::arg("alphas"), py::arg("death_probs"),
          py::arg("rates"), py::arg("target"), py::arg("benefits") = std::nullopt,
          py::arg("survival") = 0.0,
          "Scale p > 0 at which the contract under p * alphas prices at `target`.");
    m.def("allocation", &allocation, py::arg("alphas"), py::arg("death_probs"), py::arg("rates"),
          py::arg("wealth") = 0.0, py::arg("benefits") = std::nullopt, py::arg("survival") = 0.0,
          "Optimal period-by-period consumption of the insurer's position (wealth plus premium\n"
          "minus claim).  Entry t-1 of each list covers time t with atoms death_1..death_t,\n"
          "alive; `paid` holds payment amounts, `discounted` their time-0 values.");
    m.def("tree_price", &tree_price, py::arg("tree"), py::arg("alphas"), py::arg("terminal"),
          "Indifference price of an arbitrary terminal claim on an event tree given in the\n"
          "line-per-node text form \"level,parent_index,probability\" with one terminal value\n"
          "per leaf.");

    m.attr("__version__") = "1.0.0";
}
