#include "riskalloc/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "riskalloc/calibration.hpp"
#include "riskalloc/csv.hpp"
#include "riskalloc/errors.hpp"
#include "riskalloc/event_tree.hpp"
#include "riskalloc/exp_pricing.hpp"
#include "riskalloc/mortality_pricing.hpp"
#include "riskalloc/oracle.hpp"

namespace riskalloc::cli {
namespace {

// Agreement thresholds for oracle-check and the output-boundary revalidation.
constexpr double kAllocationTol = 1e-6;
constexpr double kObjectiveTol = 1e-9;
constexpr double kBoundarySlack = 1e-9;
constexpr double kLoading = 0.01;

struct Options {
    std::string mortality_path;
    std::string rates_path;
    double flat_rate = 0.0;
    std::optional<double> alpha_const;
    std::string alpha_list_text;
    std::string alpha_family_text;
    std::vector<double> sweep_alphas;
    int term = 0;      // 0: full mortality table
    int max_term = 0;  // 0: subcommand default
    double benefit = 1.0;
    double survival = 0.0;
    double wealth = 0.0;
    std::string target_path;
    double pi = 0.0;
    std::uint64_t seed = 0;
    int count = 50;
    bool no_slope = false;
    bool multi_start = false;
    bool inject_fault = false;
    std::string out_path;
};

std::vector<double> parse_double_list(const std::string& text, const std::string& flag) {
    std::vector<double> values;
    std::size_t start = 0;
    int field_no = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        std::string field =
            text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        ++field_no;
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
        if (ec != std::errc() || ptr != field.data() + field.size())
            throw ParseError(flag, field_no, "bad number '" + field + "'");
        values.push_back(value);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return values;
}

AlphaFamily parse_family(const std::string& text) {
    auto values = parse_double_list(text, "--alpha-family");
    if (values.size() != 2)
        throw ParseError("--alpha-family", 1, "expected exactly two values a,b");
    return AlphaFamily{values[0], values[1]};
}

RateCurve load_rates_or_flat(const Options& opt, int term) {
    if (!opt.rates_path.empty()) {
        RateCurve curve = csv::load_rates(opt.rates_path);
        if (curve.term() < term)
            throw std::domain_error("rate table covers " + std::to_string(curve.term()) +
                                    " periods but the horizon needs " + std::to_string(term));
        return curve;
    }
    return RateCurve::flat(opt.flat_rate, term);
}

struct ContractInputs {
    MortalityCurve mortality;
    RateCurve rates;
    ClaimProfile claim;
    int term;
};

ContractInputs load_contract(const Options& opt) {
    MortalityCurve full = csv::load_mortality(opt.mortality_path);
    int term = opt.term > 0 ? opt.term : full.term();
    if (opt.term != 0 && (opt.term < 1 || opt.term > full.term()))
        throw std::domain_error("term must lie in 1.." + std::to_string(full.term()));
    RateCurve rates = load_rates_or_flat(opt, term);
    std::vector<double> benefits(static_cast<std::size_t>(term), opt.benefit);
    ClaimProfile claim = term_claim(rates, benefits, opt.survival);
    return {full.prefix(term), std::move(rates), std::move(claim), term};
}

RiskAversionSchedule build_schedule(const Options& opt, int term) {
    if (opt.alpha_const) return RiskAversionSchedule::constant(*opt.alpha_const, term);
    if (!opt.alpha_list_text.empty()) {
        auto values = parse_double_list(opt.alpha_list_text, "--alpha-list");
        if (static_cast<int>(values.size()) != term)
            throw std::domain_error("--alpha-list needs exactly " + std::to_string(term) +
                                    " values for this horizon");
        return RiskAversionSchedule(std::move(values));
    }
    return RiskAversionSchedule(parse_family(opt.alpha_family_text).alphas(term));
}

/// Route the finished CSV to --out or the standard stream.
int deliver(const std::string& text, const Options& opt, std::ostream& out) {
    if (opt.out_path.empty()) {
        out << text;
        return exit_ok;
    }
    std::ofstream file(opt.out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw ParseError(opt.out_path, 1, "cannot open output file for writing");
    file << text;
    return exit_ok;
}

/// Output-boundary revalidation: every emitted premium must respect the
/// model-free bounds.
bool premium_in_bounds(const PremiumReport& report) {
    return report.premium >= report.expected_claim - kBoundarySlack &&
           report.premium <= report.max_claim + kBoundarySlack;
}

int cmd_price(const Options& opt, std::ostream& out, std::ostream& err) {
    auto inputs = load_contract(opt);
    auto schedule = build_schedule(opt, inputs.term);
    auto report = indifference_premium(schedule, inputs.mortality, inputs.claim);
    if (!premium_in_bounds(report)) {
        err << "internal check failed: premium escaped its bounds\n";
        return exit_check_failed;
    }
    std::vector<double> benefits(static_cast<std::size_t>(inputs.term), opt.benefit);
    double tp1 = equivalence_premium(inputs.rates, inputs.mortality, benefits);
    double tp2 = loaded_premium(inputs.rates, inputs.mortality, kLoading, benefits);

    std::ostringstream text;
    text << "T,H,E_Z,H_inf,TP1,TP2\n"
         << inputs.term << ',' << csv::format_double(report.premium) << ','
         << csv::format_double(report.expected_claim) << ','
         << csv::format_double(report.max_claim) << ',' << csv::format_double(tp1) << ','
         << csv::format_double(tp2) << '\n';
    return deliver(text.str(), opt, out);
}

int cmd_sweep(const Options& opt, std::ostream& out, std::ostream& err) {
    MortalityCurve full = csv::load_mortality(opt.mortality_path);
    int max_term = opt.max_term > 0 ? opt.max_term : full.term();
    if (max_term < 1 || max_term > full.term())
        throw std::domain_error("max term must lie in 1.." + std::to_string(full.term()));
    RateCurve rates = load_rates_or_flat(opt, max_term);
    std::optional<AlphaFamily> family;
    if (!opt.alpha_family_text.empty()) family = parse_family(opt.alpha_family_text);

    std::ostringstream text;
    text << "T,TP1,TP2";
    for (double a : opt.sweep_alphas) text << ",IP_" << csv::format_double(a);
    if (family) text << ",IP_fit";
    text << '\n';

    for (int term = 1; term <= max_term; ++term) {
        MortalityCurve mortality = full.prefix(term);
        std::vector<double> benefits(static_cast<std::size_t>(term), opt.benefit);
        ClaimProfile claim = term_claim(rates, benefits, opt.survival);
        text << term << ',' << csv::format_double(equivalence_premium(rates, mortality, benefits))
             << ',' << csv::format_double(loaded_premium(rates, mortality, kLoading, benefits));

        auto emit = [&](const RiskAversionSchedule& schedule) {
            auto report = indifference_premium(schedule, mortality, claim);
            if (!premium_in_bounds(report))
                throw std::domain_error("internal check failed: premium escaped its bounds");
            text << ',' << csv::format_double(report.premium);
        };
        for (double a : opt.sweep_alphas) emit(RiskAversionSchedule::constant(a, term));
        if (family) emit(RiskAversionSchedule(family->alphas(term)));
        text << '\n';
    }
    (void)err;
    return deliver(text.str(), opt, out);
}

int cmd_allocate(const Options& opt, std::ostream& out, std::ostream& err) {
    auto inputs = load_contract(opt);
    auto schedule = build_schedule(opt, inputs.term);
    auto allocation =
        premium_allocation(schedule, inputs.mortality, inputs.claim, inputs.rates, opt.wealth);

    std::ostringstream text;
    text << "t,atom,X,X_discounted\n";
    for (int t = 1; t <= inputs.term; ++t) {
        for (std::size_t i = 0; i < allocation.at(t).size(); ++i) {
            double paid = allocation.at(t)[i];
            double discounted = paid / inputs.rates.bond_price(t);
            text << t << ',';
            if (i < static_cast<std::size_t>(t))
                text << "death_" << (i + 1);
            else
                text << "alive";
            text << ',' << csv::format_double(paid) << ',' << csv::format_double(discounted)
                 << '\n';
        }
    }
    (void)err;
    return deliver(text.str(), opt, out);
}

int cmd_bounds(const Options& opt, std::ostream& out, std::ostream& err) {
    auto inputs = load_contract(opt);
    auto bounds = premium_bounds(inputs.mortality, inputs.claim);
    auto limits = limit_premiums(inputs.mortality, inputs.claim);

    std::ostringstream text;
    text << "T,lower,upper,zero_limit,infinity_limit\n"
         << inputs.term << ',' << csv::format_double(bounds.lower) << ','
         << csv::format_double(bounds.upper) << ',' << csv::format_double(limits.zero_aversion)
         << ',' << csv::format_double(limits.infinite_aversion) << '\n';
    (void)err;
    return deliver(text.str(), opt, out);
}

int cmd_scale(const Options& opt, std::ostream& out, std::ostream& err) {
    auto inputs = load_contract(opt);
    auto schedule = build_schedule(opt, inputs.term);
    double p = solve_scale(schedule, inputs.mortality, inputs.claim, opt.pi);
    double achieved =
        indifference_premium(schedule.scaled(p), inputs.mortality, inputs.claim).premium;

    std::ostringstream text;
    text << "p,premium\n"
         << csv::format_double(p) << ',' << csv::format_double(achieved) << '\n';
    (void)err;
    return deliver(text.str(), opt, out);
}

int cmd_calibrate(const Options& opt, std::ostream& out, std::ostream& err) {
    MortalityCurve mortality = csv::load_mortality(opt.mortality_path);
    auto target = csv::load_target(opt.target_path);
    int terms = static_cast<int>(target.size());
    RateCurve rates = load_rates_or_flat(opt, terms);

    AlphaFamily initial{};
    if (!opt.alpha_family_text.empty()) initial = parse_family(opt.alpha_family_text);
    FitOptions options;
    options.fit_b = !opt.no_slope;
    options.multi_start = opt.multi_start;

    auto fit = fit_alpha(target, mortality, rates, initial, options);

    std::ostringstream text;
    text << "a,b,rss,iterations\n"
         << csv::format_double(fit.family.a) << ',' << csv::format_double(fit.family.b) << ','
         << csv::format_double(fit.rss) << ',' << fit.iterations << '\n';
    text << "t,alpha,target,fitted,residual\n";
    for (int t = 1; t <= terms; ++t) {
        std::size_t i = static_cast<std::size_t>(t - 1);
        text << t << ',' << csv::format_double(fit.family(t)) << ','
             << csv::format_double(target[i]) << ','
             << csv::format_double(target[i] + fit.residuals[i]) << ','
             << csv::format_double(fit.residuals[i]) << '\n';
    }
    (void)err;
    return deliver(text.str(), opt, out);
}

int cmd_oracle_check(const Options& opt, std::ostream& out, std::ostream& err) {
    int depth_cap = opt.max_term > 0 ? opt.max_term : 4;
    if (depth_cap > 6) throw std::domain_error("fixture depth is capped at 6");
    if (opt.count < 1) throw std::domain_error("count must be positive");

    std::mt19937_64 rng(opt.seed);
    std::ostringstream text;
    text << "fixture,depth,allocation_gap,objective_gap,status\n";
    bool all_pass = true;
    std::string first_failure;

    for (int i = 1; i <= opt.count; ++i) {
        auto fixture = oracle::random_fixture(rng, depth_cap);
        double allocation_gap = std::numeric_limits<double>::infinity();
        double objective_gap = std::numeric_limits<double>::infinity();
        std::string status = "fail";
        try {
            auto closed = optimal_allocation(fixture.tree, fixture.rates, fixture.schedule,
                                             fixture.w);
            for (int t = 1; t <= fixture.tree.depth(); ++t)
                for (double& v : closed.at(t)) v /= fixture.rates.bond_price(t);
            if (opt.inject_fault && i == 1) closed.at(1)[0] += 0.01;

            auto numeric = oracle::solve_allocation(
                fixture.tree, oracle::UtilitySpec::exponential(fixture.schedule), fixture.w);

            allocation_gap = 0.0;
            for (int t = 1; t <= fixture.tree.depth(); ++t)
                for (std::size_t n = 0; n < closed.at(t).size(); ++n)
                    allocation_gap = std::max(
                        allocation_gap, std::abs(closed.at(t)[n] - numeric.allocation.at(t)[n]));
            objective_gap = std::abs(utility_value(fixture.tree, fixture.schedule, fixture.w) -
                                     numeric.objective);
            if (allocation_gap < kAllocationTol && objective_gap < kObjectiveTol) status = "pass";
        } catch (const ConvergenceError&) {
            status = "no_convergence";
        }
        if (status != "pass" && all_pass) {
            all_pass = false;
            first_failure = oracle::serialize_fixture(fixture);
        }
        text << i << ',' << fixture.tree.depth() << ',' << csv::format_double(allocation_gap)
             << ',' << csv::format_double(objective_gap) << ',' << status << '\n';
    }

    int code = deliver(text.str(), opt, out);
    if (!all_pass) {
        err << "oracle check failed; offending fixture follows for replay\n" << first_failure;
        return exit_check_failed;
    }
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Indifference pricing of multi-period insurance contracts"};
    app.name("riskalloc");
    app.require_subcommand(1);
    Options opt;

    auto add_out = [&](CLI::App* sub) {
        sub->add_option("--out", opt.out_path, "Write the CSV to this file instead of stdout");
    };
    auto add_mortality = [&](CLI::App* sub) {
        sub->add_option("--mortality", opt.mortality_path, "Mortality table CSV (t,q)")
            ->required();
    };
    auto add_rates = [&](CLI::App* sub) {
        auto* file = sub->add_option("--rates", opt.rates_path, "Rate table CSV (t,rate)");
        auto* flat = sub->add_option("--rate", opt.flat_rate, "Flat per-period rate (default 0)");
        file->excludes(flat);
        flat->excludes(file);
    };
    auto add_claim = [&](CLI::App* sub) {
        sub->add_option("--term", opt.term, "Contract horizon (default: whole table)");
        sub->add_option("--benefit", opt.benefit, "Death benefit per period (default 1)");
        sub->add_option("--survival", opt.survival,
                        "Discounted payment on surviving the horizon (default 0)");
    };
    auto add_single_alpha = [&](CLI::App* sub) {
        auto* group = sub->add_option_group("aversion", "risk aversion (exactly one form)");
        group->add_option("--alpha", opt.alpha_const, "Constant risk aversion");
        group->add_option("--alpha-list", opt.alpha_list_text,
                          "Per-period risk aversions a1,a2,...");
        group->add_option("--alpha-family", opt.alpha_family_text,
                          "Parameters a,b of the family a+b*sqrt(t)");
        group->require_option(1);
    };

    auto* price = app.add_subcommand(
        "price", "Indifference and traditional premiums for one contract");
    add_mortality(price);
    add_rates(price);
    add_claim(price);
    add_single_alpha(price);
    add_out(price);

    auto* sweep = app.add_subcommand("sweep", "Premiums for every horizon up to --max-term");
    add_mortality(sweep);
    add_rates(sweep);
    sweep->add_option("--max-term", opt.max_term, "Largest horizon (default: whole table)");
    sweep->add_option("--benefit", opt.benefit, "Death benefit per period (default 1)");
    sweep->add_option("--survival", opt.survival,
                      "Discounted payment on surviving the horizon (default 0)");
    auto* sweep_group = sweep->add_option_group("aversion", "risk aversion columns");
    sweep_group->add_option("--alpha", opt.sweep_alphas,
                            "Constant risk aversion; repeat for more columns");
    sweep_group->add_option("--alpha-family", opt.alpha_family_text,
                            "Parameters a,b adding an IP_fit column");
    sweep_group->require_option(1, 0);
    add_out(sweep);

    auto* allocate = app.add_subcommand(
        "allocate", "Insurer's optimal payment plan across periods and atoms");
    add_mortality(allocate);
    add_rates(allocate);
    add_claim(allocate);
    add_single_alpha(allocate);
    allocate->add_option("--wealth", opt.wealth, "Initial discounted wealth (default 0)");
    add_out(allocate);

    auto* bounds = app.add_subcommand(
        "bounds", "Premium bounds and limiting premiums for one contract");
    add_mortality(bounds);
    add_rates(bounds);
    add_claim(bounds);
    add_out(bounds);

    auto* scale = app.add_subcommand(
        "scale", "Solve for the aversion multiplier matching a target premium");
    add_mortality(scale);
    add_rates(scale);
    add_claim(scale);
    add_single_alpha(scale);
    scale->add_option("--pi", opt.pi, "Target premium")->required();
    add_out(scale);

    auto* calibrate = app.add_subcommand(
        "calibrate", "Fit the aversion family to a premium-by-term target");
    add_mortality(calibrate);
    add_rates(calibrate);
    calibrate->add_option("--target", opt.target_path, "Target CSV (T,premium)")->required();
    calibrate->add_option("--alpha-family", opt.alpha_family_text, "Initial guess a,b");
    calibrate->add_flag("--no-slope", opt.no_slope, "Fit a constant family (b pinned at 0)");
    calibrate->add_flag("--multi-start", opt.multi_start, "Restart from jittered initial points");
    add_out(calibrate);

    auto* oracle_check = app.add_subcommand(
        "oracle-check", "Randomized agreement suite: closed forms vs the numeric solver");
    oracle_check->add_option("--seed", opt.seed, "Fixture generator seed")->required();
    oracle_check->add_option("--count", opt.count, "Number of fixtures (default 50)");
    oracle_check->add_option("--max-term", opt.max_term, "Fixture depth cap (default 4, max 6)");
    oracle_check->add_flag("--inject-fault", opt.inject_fault, "Self-test: corrupt one value")
        ->group("");
    add_out(oracle_check);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return exit_parse_error;
    }

    try {
        if (price->parsed()) return cmd_price(opt, out, err);
        if (sweep->parsed()) return cmd_sweep(opt, out, err);
        if (allocate->parsed()) return cmd_allocate(opt, out, err);
        if (bounds->parsed()) return cmd_bounds(opt, out, err);
        if (scale->parsed()) return cmd_scale(opt, out, err);
        if (calibrate->parsed()) return cmd_calibrate(opt, out, err);
        if (oracle_check->parsed()) return cmd_oracle_check(opt, out, err);
    } catch (const ParseError& e) {
        err << e.what() << '\n';
        return exit_parse_error;
    } catch (const ConvergenceError& e) {
        err << "no convergence: " << e.what() << '\n';
        return exit_check_failed;
    } catch (const std::domain_error& e) {
        err << e.what() << '\n';
        return exit_domain_error;
    } catch (const std::invalid_argument& e) {
        err << e.what() << '\n';
        return exit_domain_error;
    }
    return exit_ok;
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    args.reserve(argc > 0 ? static_cast<std::size_t>(argc - 1) : 0);
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args, std::cout, std::cerr);
}

}  // namespace riskalloc::cli
