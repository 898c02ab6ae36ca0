#include "riskalloc/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <utility>

#include "riskalloc/mortality_pricing.hpp"
#include "riskalloc/risk_aversion.hpp"

namespace riskalloc {

double AlphaFamily::operator()(int t) const {
    return a + b * std::sqrt(static_cast<double>(t));
}

std::vector<double> AlphaFamily::alphas(int term) const {
    if (term < 1) throw std::domain_error("term must be at least 1");
    std::vector<double> out(static_cast<std::size_t>(term));
    for (int t = 1; t <= term; ++t) {
        double v = (*this)(t);
        if (!std::isfinite(v) || v <= 0.0)
            throw std::domain_error("risk aversion family is not positive over the term");
        out[static_cast<std::size_t>(t - 1)] = v;
    }
    return out;
}

bool AlphaFamily::positive_over(int term) const {
    if (term < 1) return false;
    for (int t = 1; t <= term; ++t) {
        double v = (*this)(t);
        if (!std::isfinite(v) || v <= 0.0) return false;
    }
    return true;
}

std::vector<double> premium_curve(const AlphaFamily& family, const MortalityCurve& mortality,
                                  const RateCurve& rates, int max_term) {
    if (max_term < 1) throw std::domain_error("horizon must be at least 1");
    if (mortality.term() < max_term)
        throw std::invalid_argument("mortality table shorter than the horizon");
    if (rates.term() < max_term)
        throw std::invalid_argument("rate curve shorter than the horizon");

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(max_term));
    for (int term = 1; term <= max_term; ++term) {
        RiskAversionSchedule schedule(family.alphas(term));
        std::vector<double> benefits(static_cast<std::size_t>(term), 1.0);
        auto claim = term_claim(rates, benefits);
        out.push_back(indifference_premium(schedule, mortality.prefix(term), claim).premium);
    }
    return out;
}

namespace {

struct Objective {
    std::span<const double> target;
    const MortalityCurve& mortality;
    const RateCurve& rates;
    bool fit_b;

    AlphaFamily family(std::span<const double> p) const {
        return AlphaFamily{p[0], fit_b ? p[1] : 0.0};
    }

    double operator()(std::span<const double> p) const {
        AlphaFamily f = family(p);
        int max_term = static_cast<int>(target.size());
        if (!f.positive_over(max_term)) return std::numeric_limits<double>::infinity();
        auto fitted = premium_curve(f, mortality, rates, max_term);
        double rss = 0.0;
        for (std::size_t i = 0; i < fitted.size(); ++i) {
            double r = fitted[i] - target[i];
            rss += r * r;
        }
        return rss;
    }
};

struct SimplexResult {
    std::vector<double> point;
    double value = 0.0;
    int iterations = 0;
    std::vector<double> trace;
};

struct Vertex {
    std::vector<double> point;
    double value;
};

// Nelder-Mead with the standard coefficients: reflection 1, expansion 2,
// contraction 0.5, shrink 0.5.  Stops when the objective spread over the
// simplex falls below `tolerance` or the iteration budget runs out.
SimplexResult nelder_mead(const Objective& objective, const std::vector<double>& start,
                          int max_iterations, double tolerance) {
    const std::size_t d = start.size();
    std::vector<Vertex> simplex;
    simplex.reserve(d + 1);
    simplex.push_back({start, objective(start)});
    for (std::size_t i = 0; i < d; ++i) {
        auto point = start;
        point[i] += (point[i] != 0.0) ? 0.05 * std::abs(point[i]) : 0.00025;
        double value = objective(point);
        simplex.push_back({std::move(point), value});
    }
    if (std::ranges::none_of(simplex, [](const Vertex& v) { return std::isfinite(v.value); }))
        throw std::domain_error("no feasible risk aversion family near the initial guess");

    auto by_value = [](const Vertex& lhs, const Vertex& rhs) { return lhs.value < rhs.value; };
    std::ranges::sort(simplex, by_value);

    SimplexResult result;
    result.trace.push_back(simplex.front().value);

    int iteration = 0;
    for (; iteration < max_iterations; ++iteration) {
        if (simplex.back().value - simplex.front().value < tolerance) break;

        std::vector<double> centroid(d, 0.0);
        for (std::size_t v = 0; v < d; ++v)
            for (std::size_t i = 0; i < d; ++i) centroid[i] += simplex[v].point[i] / d;

        auto blend = [&](double weight) {
            std::vector<double> point(d);
            for (std::size_t i = 0; i < d; ++i)
                point[i] = centroid[i] + weight * (centroid[i] - simplex.back().point[i]);
            return point;
        };

        auto reflected = blend(1.0);
        double f_reflected = objective(reflected);
        if (f_reflected < simplex.front().value) {
            auto expanded = blend(2.0);
            double f_expanded = objective(expanded);
            if (f_expanded < f_reflected)
                simplex.back() = {std::move(expanded), f_expanded};
            else
                simplex.back() = {std::move(reflected), f_reflected};
        } else if (f_reflected < simplex[d - 1].value) {
            simplex.back() = {std::move(reflected), f_reflected};
        } else {
            bool outside = f_reflected < simplex.back().value;
            auto contracted = blend(outside ? 0.5 : -0.5);
            double f_contracted = objective(contracted);
            double bar = outside ? f_reflected : simplex.back().value;
            if (f_contracted <= bar) {
                simplex.back() = {std::move(contracted), f_contracted};
            } else {
                for (std::size_t v = 1; v <= d; ++v) {
                    for (std::size_t i = 0; i < d; ++i)
                        simplex[v].point[i] =
                            0.5 * (simplex[v].point[i] + simplex.front().point[i]);
                    simplex[v].value = objective(simplex[v].point);
                }
            }
        }

        std::ranges::sort(simplex, by_value);
        result.trace.push_back(simplex.front().value);
    }

    result.point = simplex.front().point;
    result.value = simplex.front().value;
    result.iterations = iteration;
    return result;
}

}  // namespace

FitReport fit_alpha(std::span<const double> target, const MortalityCurve& mortality,
                    const RateCurve& rates, AlphaFamily initial, const FitOptions& options) {
    if (target.empty()) throw std::invalid_argument("target curve is empty");
    int max_term = static_cast<int>(target.size());
    if (mortality.term() < max_term)
        throw std::invalid_argument("mortality table shorter than the target curve");
    if (rates.term() < max_term)
        throw std::invalid_argument("rate curve shorter than the target curve");
    for (double v : target)
        if (!std::isfinite(v)) throw std::invalid_argument("target premiums must be finite");
    if (options.max_iterations < 1) throw std::domain_error("iteration budget must be positive");
    if (options.tolerance <= 0.0) throw std::domain_error("tolerance must be positive");

    Objective objective{target, mortality, rates, options.fit_b};

    std::vector<double> start{initial.a};
    if (options.fit_b) start.push_back(initial.b);

    SimplexResult best =
        nelder_mead(objective, start, options.max_iterations, options.tolerance);

    if (options.multi_start) {
        std::mt19937_64 rng(options.jitter_seed);
        std::uniform_real_distribution<double> log_factor(-0.7, 0.7);
        std::uniform_real_distribution<double> nudge(0.01, 0.2);
        for (int run = 0; run < 5; ++run) {
            auto jittered = start;
            for (double& p : jittered)
                p = (p != 0.0) ? p * std::exp(log_factor(rng)) : nudge(rng);
            try {
                auto probe =
                    nelder_mead(objective, jittered, options.max_iterations, options.tolerance);
                if (probe.value < best.value) best = std::move(probe);
            } catch (const std::domain_error&) {
                // the jittered start landed outside the feasible region: skip it
            }
        }
    }

    FitReport report;
    report.family = objective.family(best.point);
    report.rss = best.value;
    report.iterations = best.iterations;
    report.best_rss_trace = std::move(best.trace);
    auto fitted = premium_curve(report.family, mortality, rates, max_term);
    report.residuals.resize(fitted.size());
    for (std::size_t i = 0; i < fitted.size(); ++i) report.residuals[i] = fitted[i] - target[i];
    return report;
}

}  // namespace riskalloc
