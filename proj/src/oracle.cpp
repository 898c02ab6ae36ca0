#include "riskalloc/oracle.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "riskalloc/csv.hpp"
#include "riskalloc/errors.hpp"

namespace riskalloc::oracle {

namespace {

void check_problem(const EventTree& tree, const UtilitySpec& utilities, const TerminalRisk& w) {
    if (utilities.term != tree.depth())
        throw std::invalid_argument("utility spec must cover every tree period");
    if (!utilities.value || !utilities.derivative)
        throw std::invalid_argument("utility spec is missing its callables");
    if (w.values.size() != tree.leaf_count())
        throw std::invalid_argument("terminal risk needs one value per leaf");
    for (double v : w.values) {
        if (!std::isfinite(v)) throw std::invalid_argument("terminal risk values must be finite");
    }
}

// Forced leaf allocation: w minus the discounted path sum of the free levels.
LevelValues terminal_layer(const EventTree& tree, const AdaptedProcess& x, const TerminalRisk& w) {
    int depth = tree.depth();
    LevelValues carried(1, 0.0);
    for (int t = 1; t < depth; ++t) {
        LevelValues next(tree.level_size(t));
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = carried[tree.parent(t, i)] + x.at(t)[i];
        carried = std::move(next);
    }
    LevelValues terminal(tree.leaf_count());
    for (std::size_t leaf = 0; leaf < terminal.size(); ++leaf)
        terminal[leaf] = w.values[leaf] - carried[tree.parent(depth, leaf)];
    return terminal;
}

double objective_value(const EventTree& tree, const UtilitySpec& utilities,
                       const AdaptedProcess& x, const LevelValues& terminal) {
    int depth = tree.depth();
    double total = 0.0;
    for (int t = 1; t < depth; ++t)
        for (std::size_t i = 0; i < tree.level_size(t); ++i)
            total += tree.node_prob(t, i) * utilities.value(t, x.at(t)[i]);
    for (std::size_t leaf = 0; leaf < terminal.size(); ++leaf)
        total += tree.node_prob(depth, leaf) * utilities.value(depth, terminal[leaf]);
    return total;
}

double log_derivative(const UtilitySpec& utilities, int t, double x) {
    return std::log(std::max(utilities.derivative(t, x), 1e-300));
}

// -(log u')' = -u''/u', taken from centered differences of the supplied
// derivative so the solver stays a black-box optimizer.
double log_bend(const UtilitySpec& utilities, int t, double x) {
    double h = 1e-6 * (1.0 + std::abs(x));
    double fall =
        (log_derivative(utilities, t, x - h) - log_derivative(utilities, t, x + h)) / (2.0 * h);
    return std::max(fall, 0.0);
}

// Optimality requires P(n) u_t'(x) at every free node to equal the pull of
// the leaves below it, sum P(leaf) u_T'(terminal).  Both sides are positive,
// so the mismatch is measured between their logarithms -- the plain
// difference cancels catastrophically once the marginal utilities get large.
// Scaling the log mismatch by the curvature of the log derivative turns it
// into a diagonal Newton correction expressed in allocation units.
struct Correction {
    AdaptedProcess newton;    ///< per-node move towards the optimum
    AdaptedProcess gradient;  ///< raw objective gradient, for the ascent test
    double sup = 0.0;         ///< largest |newton| entry
};

Correction newton_correction(const EventTree& tree, const UtilitySpec& utilities,
                             const AdaptedProcess& x, const LevelValues& terminal) {
    int depth = tree.depth();

    // Leaf pull below each node, carried as shift + mass with
    // log(pull) = shift + log(mass), plus the same sum weighted by the leaf
    // curvatures (the log-derivative of the pull in the node's allocation).
    struct Pull {
        double shift = -std::numeric_limits<double>::infinity();
        double mass = 0.0;
        double bent = 0.0;
    };
    std::vector<Pull> pull(tree.leaf_count());
    for (std::size_t leaf = 0; leaf < pull.size(); ++leaf) {
        double log_term = std::log(tree.node_prob(depth, leaf)) +
                          log_derivative(utilities, depth, terminal[leaf]);
        pull[leaf] = {log_term, 1.0, log_bend(utilities, depth, terminal[leaf])};
    }

    Correction result;
    result.newton = AdaptedProcess::zeros(tree);
    result.gradient = AdaptedProcess::zeros(tree);
    for (int t = depth - 1; t >= 1; --t) {
        std::vector<Pull> up(tree.level_size(t));
        for (std::size_t i = 0; i < pull.size(); ++i) {
            Pull& parent = up[tree.parent(t + 1, i)];
            const Pull& child = pull[i];
            if (child.shift == -std::numeric_limits<double>::infinity()) continue;
            if (parent.shift < child.shift) {
                double rebase = parent.mass == 0.0 ? 0.0 : std::exp(parent.shift - child.shift);
                parent = {child.shift, child.mass + parent.mass * rebase,
                          child.bent + parent.bent * rebase};
            } else {
                double rebase = std::exp(child.shift - parent.shift);
                parent.mass += child.mass * rebase;
                parent.bent += child.bent * rebase;
            }
        }
        pull = std::move(up);

        for (std::size_t i = 0; i < tree.level_size(t); ++i) {
            double log_own =
                std::log(tree.node_prob(t, i)) + log_derivative(utilities, t, x.at(t)[i]);
            double log_pull = pull[i].shift + std::log(pull[i].mass);
            double mismatch = log_own - log_pull;
            double curvature = log_bend(utilities, t, x.at(t)[i]) + pull[i].bent / pull[i].mass;
            result.newton.at(t)[i] = mismatch / std::max(curvature, 1e-12);
            // e^a - e^b, evaluated from the larger exponent to stay stable.
            double base = std::max(log_own, log_pull);
            result.gradient.at(t)[i] =
                log_own >= log_pull ? -std::exp(base) * std::expm1(log_pull - log_own)
                                    : std::exp(base) * std::expm1(log_own - log_pull);
            result.sup = std::max(result.sup, std::abs(result.newton.at(t)[i]));
        }
    }
    return result;
}

// Objective change for a move of `step` along `delta`, evaluated as a sum of
// products P * e * mean(u') instead of a difference of nearby objective
// values.  Two-point Gauss quadrature of the derivative along each
// coordinate's move reproduces u(x+e) - u(x) to fifth order in e, so for the
// tiny moves near the optimum this stays accurate long after the plain
// difference has rounded to zero.
double ascent_gain(const EventTree& tree, const UtilitySpec& utilities, const AdaptedProcess& x,
                   const LevelValues& terminal, const AdaptedProcess& delta, double step) {
    int depth = tree.depth();
    constexpr double kLow = 0.2113248654051871;  // (1 -+ 1/sqrt(3)) / 2
    constexpr double kHigh = 0.7886751345948129;
    auto piece = [&utilities](int t, double at, double e) {
        return 0.5 * e *
               (utilities.derivative(t, at + kLow * e) + utilities.derivative(t, at + kHigh * e));
    };

    double gain = 0.0;
    for (int t = 1; t < depth; ++t)
        for (std::size_t i = 0; i < tree.level_size(t); ++i)
            gain += tree.node_prob(t, i) * piece(t, x.at(t)[i], step * delta.at(t)[i]);

    // Terminal values pick up the negated path sum of the move.
    TerminalRisk still;
    still.values.assign(tree.leaf_count(), 0.0);
    LevelValues drop = terminal_layer(tree, delta, still);
    for (std::size_t leaf = 0; leaf < drop.size(); ++leaf)
        gain += tree.node_prob(depth, leaf) * piece(depth, terminal[leaf], step * drop[leaf]);
    return gain;
}

}  // namespace

UtilitySpec UtilitySpec::exponential(const RiskAversionSchedule& schedule) {
    UtilitySpec spec;
    spec.term = schedule.term();
    spec.value = [schedule](int t, double x) { return utility(schedule, t, x); };
    spec.derivative = [schedule](int t, double x) { return marginal_utility(schedule, t, x); };
    return spec;
}

UtilitySpec UtilitySpec::weighted_exponential(const RiskAversionSchedule& schedule,
                                              std::vector<double> weights) {
    if (static_cast<int>(weights.size()) != schedule.term())
        throw std::invalid_argument("one weight per period required");
    for (double w : weights) {
        if (!std::isfinite(w) || w <= 0.0)
            throw std::domain_error("welfare weights must be positive");
    }
    UtilitySpec spec;
    spec.term = schedule.term();
    spec.value = [schedule, weights](int t, double x) {
        return weights[static_cast<std::size_t>(t - 1)] * utility(schedule, t, x);
    };
    spec.derivative = [schedule, weights](int t, double x) {
        return weights[static_cast<std::size_t>(t - 1)] * marginal_utility(schedule, t, x);
    };
    return spec;
}

OptimizationReport solve_allocation(const EventTree& tree, const UtilitySpec& utilities,
                                    const TerminalRisk& w, double tolerance, int max_iterations,
                                    const AdaptedProcess* initial) {
    check_problem(tree, utilities, w);
    if (tolerance <= 0.0) throw std::domain_error("tolerance must be positive");
    if (max_iterations < 1) throw std::domain_error("iteration budget must be positive");
    int depth = tree.depth();

    OptimizationReport report;
    report.allocation = AdaptedProcess::zeros(tree);

    if (depth == 1) {
        report.allocation.at(1) = w.values;
        LevelValues terminal = w.values;
        report.objective = objective_value(tree, utilities, report.allocation, terminal);
        return report;
    }

    AdaptedProcess x = AdaptedProcess::zeros(tree);
    if (initial != nullptr) {
        check_adapted(tree, *initial);
        x = *initial;
        x.at(depth).assign(tree.leaf_count(), 0.0);  // the leaf layer is not free
    } else {
        double spread = expectation(tree, w.values, depth) / depth;
        for (int t = 1; t < depth; ++t) x.at(t).assign(tree.level_size(t), spread);
    }

    LevelValues terminal = terminal_layer(tree, x, w);
    double value = objective_value(tree, utilities, x, terminal);
    // Step 1 along the correction is the diagonal Newton step, so its sup
    // norm measures the distance to the optimum in allocation units: that
    // keeps both the pace and the stopping rule independent of how the
    // probabilities and the risk aversions scale the coordinates.
    Correction current = newton_correction(tree, utilities, x, terminal);

    constexpr double kArmijo = 1e-4;
    constexpr double kMinStep = 1e-18;
    // Moves this small have fifth powers far below double noise, so the
    // quadrature form of the ascent test is trustworthy for them.
    constexpr double kTinyMove = 1e-4;

    double step = 1.0;
    for (int iteration = 0; iteration < max_iterations; ++iteration) {
        report.iterations = iteration;
        report.gradient_norm = current.sup;
        if (current.sup < tolerance) {
            report.allocation = x;
            report.allocation.at(depth) = terminal;
            report.objective = value;
            return report;
        }

        double slope = 0.0;  // directional derivative along the correction
        for (int t = 1; t < depth; ++t)
            for (std::size_t i = 0; i < current.newton.at(t).size(); ++i)
                slope += current.gradient.at(t)[i] * current.newton.at(t)[i];

        step = std::min(2.0 * step, 1.0);
        while (true) {
            AdaptedProcess trial = x;
            for (int t = 1; t < depth; ++t)
                for (std::size_t i = 0; i < trial.at(t).size(); ++i)
                    trial.at(t)[i] += step * current.newton.at(t)[i];
            LevelValues trial_terminal = terminal_layer(tree, trial, w);
            double trial_value = objective_value(tree, utilities, trial, trial_terminal);

            bool accepted = trial_value > value + kArmijo * step * slope;
            if (!accepted && step * current.sup <= kTinyMove) {
                // Near the optimum the improvement no longer registers in the
                // plain objective difference (it rounds away), so decide the
                // same ascent test on the directly evaluated change instead.
                accepted =
                    ascent_gain(tree, utilities, x, terminal, current.newton, step) >
                    kArmijo * step * slope;
            }
            if (accepted) {
                x = std::move(trial);
                terminal = std::move(trial_terminal);
                value = trial_value;
                current = newton_correction(tree, utilities, x, terminal);
                break;
            }
            step *= 0.5;
            if (step < kMinStep)
                throw ConvergenceError("line search stalled before reaching the tolerance",
                                       iteration, current.sup);
        }
    }

    throw ConvergenceError("gradient ascent exhausted its iteration budget", max_iterations,
                           current.sup);
}

FirstOrderCheck check_first_order(const EventTree& tree, const UtilitySpec& utilities,
                                  const AdaptedProcess& allocation, double tolerance) {
    if (utilities.term != tree.depth())
        throw std::invalid_argument("utility spec must cover every tree period");
    check_adapted(tree, allocation);

    FirstOrderCheck result;
    for (int t = 2; t <= tree.depth(); ++t) {
        LevelValues m(tree.level_size(t));
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = utilities.derivative(t, allocation.at(t)[i]);
        auto back = conditional_expectation(tree, m, t, t - 1);
        for (std::size_t i = 0; i < back.size(); ++i) {
            double here = utilities.derivative(t - 1, allocation.at(t - 1)[i]);
            result.max_residual = std::max(result.max_residual, std::abs(back[i] - here));
        }
    }
    result.pass = result.max_residual < tolerance;
    return result;
}

ParetoRecovery recover_pareto_weights(const EventTree& tree, const UtilitySpec& utilities,
                                      const AdaptedProcess& allocation, double tolerance) {
    if (utilities.term != tree.depth())
        throw std::invalid_argument("utility spec must cover every tree period");
    check_adapted(tree, allocation);
    int depth = tree.depth();

    std::vector<LevelValues> marginals(static_cast<std::size_t>(depth) + 1);
    std::vector<double> mean(static_cast<std::size_t>(depth) + 1, 0.0);
    for (int t = 1; t <= depth; ++t) {
        auto& m = marginals[static_cast<std::size_t>(t)];
        m.resize(tree.level_size(t));
        for (std::size_t i = 0; i < m.size(); ++i)
            m[i] = utilities.derivative(t, allocation.at(t)[i]);
        mean[static_cast<std::size_t>(t)] = expectation(tree, m, t);
    }

    ParetoRecovery result;
    result.weights.resize(static_cast<std::size_t>(depth));
    for (int t = 1; t <= depth; ++t)
        result.weights[static_cast<std::size_t>(t - 1)] =
            mean[1] / mean[static_cast<std::size_t>(t)];

    for (int t = 2; t <= depth; ++t) {
        double lambda_t = result.weights[static_cast<std::size_t>(t - 1)];
        double lambda_prev = result.weights[static_cast<std::size_t>(t - 2)];
        LevelValues weighted(marginals[static_cast<std::size_t>(t)]);
        for (double& v : weighted) v *= lambda_t;
        auto back = conditional_expectation(tree, weighted, t, t - 1);
        for (std::size_t i = 0; i < back.size(); ++i) {
            double here = lambda_prev * marginals[static_cast<std::size_t>(t - 1)][i];
            result.max_residual = std::max(result.max_residual, std::abs(back[i] - here));
        }
    }
    result.pass = result.max_residual < tolerance;
    return result;
}

Fixture random_fixture(std::mt19937_64& rng, int max_depth) {
    if (max_depth < 1) throw std::domain_error("fixture depth must be at least 1");
    std::uniform_int_distribution<int> depth_dist(1, max_depth);
    std::uniform_int_distribution<int> branch_dist(2, 3);
    std::uniform_real_distribution<double> raw_prob(0.3, 1.0);
    std::uniform_real_distribution<double> alpha_dist(0.1, 5.0);
    std::uniform_real_distribution<double> rate_dist(0.0, 0.1);
    std::uniform_real_distribution<double> risk_dist(-2.0, 2.0);

    int depth = depth_dist(rng);
    TreeBuilder builder;
    std::size_t parents = 1;
    for (int t = 1; t <= depth; ++t) {
        std::size_t added = 0;
        for (std::size_t parent = 0; parent < parents; ++parent) {
            int branches = branch_dist(rng);
            std::vector<double> raw(static_cast<std::size_t>(branches));
            double total = 0.0;
            for (double& r : raw) total += r = raw_prob(rng);
            for (double r : raw) {
                builder.add_node(t, parent, r / total);
                ++added;
            }
        }
        parents = added;
    }
    EventTree tree = builder.build();

    std::vector<double> alphas(static_cast<std::size_t>(depth));
    for (double& a : alphas) a = alpha_dist(rng);
    std::vector<double> rates(static_cast<std::size_t>(depth));
    for (double& r : rates) r = rate_dist(rng);
    TerminalRisk w{std::vector<double>(tree.leaf_count())};
    for (double& v : w.values) v = risk_dist(rng);

    return Fixture{std::move(tree), RateCurve(std::move(rates)),
                   RiskAversionSchedule(std::move(alphas)), std::move(w)};
}

std::string serialize_fixture(const Fixture& fixture) {
    auto join = [](const std::vector<double>& values) {
        std::string out;
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (i > 0) out += ',';
            out += csv::format_double(values[i]);
        }
        return out;
    };
    std::ostringstream out;
    out << "tree\n" << fixture.tree.to_text();
    out << "rates\n" << join(fixture.rates.rates()) << '\n';
    out << "alpha\n" << join(fixture.schedule.alphas()) << '\n';
    out << "w\n" << join(fixture.w.values) << '\n';
    return out.str();
}

Fixture parse_fixture(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::string section;
    std::string tree_text;
    std::vector<double> rates, alphas, w;
    int line_no = 0;

    auto parse_list = [&](const std::string& body) {
        std::vector<double> values;
        std::size_t start = 0;
        while (start <= body.size()) {
            std::size_t comma = body.find(',', start);
            std::string field =
                body.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc() || ptr != field.data() + field.size())
                throw ParseError("<fixture>", line_no, "bad number '" + field + "'");
            values.push_back(v);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return values;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line == "tree" || line == "rates" || line == "alpha" || line == "w") {
            section = line;
            continue;
        }
        if (section == "tree")
            tree_text += line + "\n";
        else if (section == "rates")
            rates = parse_list(line);
        else if (section == "alpha")
            alphas = parse_list(line);
        else if (section == "w")
            w = parse_list(line);
        else
            throw ParseError("<fixture>", line_no, "content before any section header");
    }
    if (tree_text.empty() || rates.empty() || alphas.empty() || w.empty())
        throw ParseError("<fixture>", line_no, "fixture needs tree, rates, alpha and w sections");

    return Fixture{EventTree::from_text(tree_text), RateCurve(std::move(rates)),
                   RiskAversionSchedule(std::move(alphas)), TerminalRisk{std::move(w)}};
}

}  // namespace riskalloc::oracle
