#pragma once

// Command-line surface. Five commands (occupancy, condition, posterior,
// limit, sample) over a shared set of phenomenon sources. Everything routes
// through run(), which owns the exit-status contract:
//   0 success, 2 parse/validation error, 3 domain error.
// Errors leave as machine-readable JSON on the error stream.

#include <CLI11.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "phenom/errors.hpp"
#include "phenom/io.hpp"
#include "phenom/limitdist.hpp"
#include "phenom/mixtures.hpp"
#include "phenom/occupancy.hpp"
#include "phenom/operators.hpp"
#include "phenom/phenomenon.hpp"
#include "phenom/sampler.hpp"
#include "phenom/scalar.hpp"

namespace phenom::cli {

struct Invocation {
    // globals
    std::string backend = "exact";
    std::size_t depth = 64;
    std::uint64_t seed = 0;
    std::string output = "json";
    int precision = 6;

    // phenomenon / model source (exactly one per invocation)
    bool spec_given = false;
    bool constant_given = false;
    bool uniform_given = false;
    bool atoms_given = false;
    bool urn_given = false;
    std::string spec_path;
    std::string constant_value;
    std::string atoms_text;
    std::vector<std::string> urn_args;  // N H n alpha beta

    // command parameters
    std::string command;
    std::size_t trials_n = 0;  // occupancy -n / limit -n / sample -n
    bool n_given = false;
    std::size_t successes = 0;  // condition -r
    std::size_t failures = 0;   // condition -s
    std::string evidence;       // posterior positional
    std::vector<std::string> interval;  // limit/sample --interval
    bool cdf_grid = false;
    std::string limit_frequency;  // limit --posterior-limit
    std::size_t grid_points = 1001;
    std::size_t mc_trials = 0;  // sample --trials
};

namespace detail {

inline void add_spec_options(CLI::App* sub, Invocation& inv) {
    auto* grp = sub->add_option_group("source", "where the phenomenon or model comes from");
    grp->add_option("--spec", inv.spec_path, "JSON file: moments, atoms, or hypotheses document")
        ->each([&inv](const std::string&) { inv.spec_given = true; });
    grp->add_option("--constant", inv.constant_value, "constant phenomenon at probability p")
        ->each([&inv](const std::string&) { inv.constant_given = true; });
    grp->add_flag("--uniform", inv.uniform_given,
                  "uniform phenomenon, moments 1/(h+1) up to --depth");
    grp->add_option("--atoms", inv.atoms_text, "atomic mixture as p:w,p:w,...")
        ->each([&inv](const std::string&) { inv.atoms_given = true; });
    grp->add_option("--urn", inv.urn_args,
                    "urn scenario: N H n alpha beta (hypotheses \"a\" and \"b\")")
        ->type_size(5)  // one group of exactly five tokens, leave positionals alone
        ->expected(1)
        ->allow_extra_args(false)
        ->each([&inv](const std::string&) { inv.urn_given = true; });
    grp->require_option(1);
}

template <backend_scalar T>
std::vector<Atom<T>> parse_atom_list(const std::string& text) {
    std::vector<Atom<T>> atoms;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) comma = text.size();
        const std::string item = text.substr(start, comma - start);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw parse_error("atom '" + item + "' is not of the form p:w");
        atoms.push_back(Atom<T>{scalar_traits<T>::parse(item.substr(0, colon)),
                                scalar_traits<T>::parse(item.substr(colon + 1))});
        start = comma + 1;
    }
    return atoms;
}

template <backend_scalar T>
struct SpecInput {
    std::optional<Phenomenon<T>> phenomenon;
    std::optional<HypothesisModel<T>> model;
};

template <backend_scalar T>
SpecInput<T> load_spec(const Invocation& inv) {
    SpecInput<T> spec;
    if (inv.spec_given) {
        std::ifstream in(inv.spec_path);
        if (!in) throw parse_error("cannot open spec file '" + inv.spec_path + "'");
        json doc;
        try {
            doc = json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw parse_error("spec file '" + inv.spec_path + "' is not valid JSON: " + e.what());
        }
        if (doc.is_object() && doc.contains("kind") && doc["kind"] == "hypotheses")
            spec.model = model_from_json<T>(doc);
        else
            spec.phenomenon = phenomenon_from_json<T>(doc);
    } else if (inv.constant_given) {
        spec.phenomenon = constant_phenomenon(scalar_traits<T>::parse(inv.constant_value));
    } else if (inv.uniform_given) {
        spec.phenomenon = uniform_phenomenon<T>(inv.depth);
    } else if (inv.atoms_given) {
        spec.phenomenon = atomic_mixture(parse_atom_list<T>(inv.atoms_text));
    } else {
        auto parse_count = [](const std::string& s, const char* what) -> std::size_t {
            try {
                std::size_t pos = 0;
                const long long v = std::stoll(s, &pos);
                if (pos != s.size() || v < 0) throw std::invalid_argument(s);
                return static_cast<std::size_t>(v);
            } catch (const std::exception&) {
                throw parse_error(std::string("urn ") + what + " must be a nonnegative integer, got '" +
                                  s + "'");
            }
        };
        spec.model = urn_scenario<T>(parse_count(inv.urn_args[0], "N"),
                                     parse_count(inv.urn_args[1], "H"),
                                     parse_count(inv.urn_args[2], "n"),
                                     scalar_traits<T>::parse(inv.urn_args[3]),
                                     scalar_traits<T>::parse(inv.urn_args[4]));
    }
    return spec;
}

// Commands that act on a single phenomenon collapse a model to its mixture.
template <backend_scalar T>
Phenomenon<T> phenomenon_for(const SpecInput<T>& spec) {
    if (spec.phenomenon) return *spec.phenomenon;
    return mixture_of_hypotheses(*spec.model);
}

template <backend_scalar T>
HypothesisModel<T> model_for(const SpecInput<T>& spec, const char* command) {
    if (spec.model) return *spec.model;
    throw parse_error(std::string(command) +
                      " needs a hypothesis model: --urn or --spec with kind \"hypotheses\"");
}

// Exact-backend documents carry rationals as strings, so reports also attach
// rounded decimal companions for direct reading; the float backend's numbers
// are already decimal.
template <backend_scalar T>
void attach_decimal(json& doc, const std::string& key, const T& value, int precision) {
    doc[key] = phenom::detail::scalar_to_json(value, precision);
    if constexpr (scalar_traits<T>::is_exact)
        doc[key + "_decimal"] = phenom::detail::scalar_to_decimal(value, precision);
}

template <backend_scalar T>
int cmd_occupancy(const Invocation& inv, std::ostream& out) {
    const Phenomenon<T> ph = phenomenon_for(load_spec<T>(inv));
    const OccupancyRow<T> row = occupancy_row(ph, inv.trials_n);
    if (inv.output == "csv")
        out << occupancy_row_to_csv(row, inv.precision);
    else
        out << occupancy_row_to_json(row, inv.precision).dump(2) << '\n';
    return 0;
}

template <backend_scalar T>
int cmd_condition(const Invocation& inv, std::ostream& out) {
    const Phenomenon<T> ph = phenomenon_for(load_spec<T>(inv));
    const Phenomenon<T> conditioned =
        condition_evidence(ph, EvidenceCount{inv.successes, inv.failures});
    out << phenomenon_to_json(conditioned).dump(2) << '\n';
    return 0;
}

template <backend_scalar T>
int cmd_posterior(const Invocation& inv, std::ostream& out) {
    const SpecInput<T> spec = load_spec<T>(inv);
    const HypothesisModel<T> model = model_for(spec, "posterior");
    const std::vector<bool> draws = parse_evidence(inv.evidence);
    const auto trace = posterior_trajectory(model, draws);

    EvidenceCount ev{0, 0};
    for (bool d : draws) (d ? ev.successes : ev.failures) += 1;
    const T predictive =
        predictive_probability(mixture_of_hypotheses(model), ev);

    if (inv.output == "csv") {
        std::string text = "step";
        for (const auto& [label, w] : trace.front()) text += "," + label;
        text += '\n';
        for (std::size_t k = 0; k < trace.size(); ++k) {
            text += std::to_string(k);
            for (const auto& [label, w] : trace[k])
                text += "," + phenom::detail::format_scalar(w, inv.precision);
            text += '\n';
        }
        out << text;
        return 0;
    }

    json doc;
    doc["kind"] = "posterior";
    doc["backend"] = scalar_traits<T>::backend_name;
    doc["evidence"] = inv.evidence;
    json steps = json::array();
    for (std::size_t k = 0; k < trace.size(); ++k) {
        json entry;
        entry["step"] = k;
        json weights;
        for (const auto& [label, w] : trace[k])
            weights[label] = phenom::detail::scalar_to_json(w, inv.precision);
        entry["posterior"] = std::move(weights);
        if constexpr (scalar_traits<T>::is_exact) {
            json decimals;
            for (const auto& [label, w] : trace[k])
                decimals[label] = phenom::detail::scalar_to_decimal(w, inv.precision);
            entry["posterior_decimal"] = std::move(decimals);
        }
        steps.push_back(std::move(entry));
    }
    doc["trace"] = std::move(steps);
    attach_decimal(doc, "predictive", predictive, inv.precision);
    out << doc.dump(2) << '\n';
    return 0;
}

template <backend_scalar T>
int cmd_limit(const Invocation& inv, std::ostream& out) {
    const SpecInput<T> spec = load_spec<T>(inv);

    if (inv.cdf_grid) {
        if (inv.grid_points < 2) throw index_out_of_range("grid needs at least two points");
        const Phenomenon<T> ph = phenomenon_for(spec);
        if (ph.is_atomic()) {
            const LimitCdf<T> cdf = limit_cdf(ph);
            if (inv.output == "csv") {
                std::vector<std::pair<T, T>> pts;
                pts.reserve(inv.grid_points);
                for (std::size_t k = 0; k < inv.grid_points; ++k) {
                    T xi = scalar_traits<T>::from_ratio(BigInt(k), BigInt(inv.grid_points - 1));
                    pts.emplace_back(xi, cdf.eval(xi));
                }
                out << cdf_grid_to_csv(pts, inv.precision);
            } else {
                out << limit_cdf_to_json(cdf, inv.precision).dump(2) << '\n';
            }
        } else {
            const std::size_t horizon = inv.n_given ? inv.trials_n : *ph.depth_budget();
            const LimitCdf<T> cdf = sampled_limit_cdf(ph, horizon, inv.grid_points);
            if (inv.output == "csv")
                out << cdf_grid_to_csv(cdf.points(), inv.precision);
            else
                out << limit_cdf_to_json(cdf, inv.precision).dump(2) << '\n';
        }
        return 0;
    }

    if (inv.interval.size() == 2) {
        const Phenomenon<T> ph = phenomenon_for(spec);
        const std::size_t horizon =
            inv.n_given ? inv.trials_n : (ph.is_atomic() ? 100 : *ph.depth_budget());
        const T xi1 = scalar_traits<T>::parse(inv.interval[0]);
        const T xi2 = scalar_traits<T>::parse(inv.interval[1]);
        const Theorem1Result<T> result = theorem1_interval(ph, xi1, xi2, horizon);
        json doc;
        doc["kind"] = "interval";
        doc["backend"] = scalar_traits<T>::backend_name;
        attach_decimal(doc, "xi1", xi1, inv.precision);
        attach_decimal(doc, "xi2", xi2, inv.precision);
        doc["n"] = horizon;
        attach_decimal(doc, "finite_n", result.finite_n, inv.precision);
        if (result.limit) attach_decimal(doc, "limit", *result.limit, inv.precision);
        out << doc.dump(2) << '\n';
        return 0;
    }

    // --posterior-limit f: long-run posterior over hypotheses; a bare
    // phenomenon is treated as a one-hypothesis model so the carrier atoms
    // are still reported.
    HypothesisModel<T> model =
        spec.model ? *spec.model
                   : HypothesisModel<T>({HypothesisComponent<T>{
                         "phenomenon", scalar_traits<T>::one(), *spec.phenomenon}});
    const T f = scalar_traits<T>::parse(inv.limit_frequency);
    const PosteriorLimit<T> lim = posterior_limit(model, FrequencySpec<T>::exact(f));
    json doc;
    doc["kind"] = "posterior_limit";
    doc["backend"] = scalar_traits<T>::backend_name;
    attach_decimal(doc, "frequency", f, inv.precision);
    json weights;
    for (const auto& [label, w] : lim.weights)
        weights[label] = phenom::detail::scalar_to_json(w, inv.precision);
    doc["weights"] = std::move(weights);
    if constexpr (scalar_traits<T>::is_exact) {
        json decimals;
        for (const auto& [label, w] : lim.weights)
            decimals[label] = phenom::detail::scalar_to_decimal(w, inv.precision);
        doc["weights_decimal"] = std::move(decimals);
    }
    json carrier = json::array();
    for (const T& p : lim.carrier)
        carrier.push_back(phenom::detail::scalar_to_json(p, inv.precision));
    doc["carrier"] = std::move(carrier);
    doc["near_tie"] = lim.near_tie;
    out << doc.dump(2) << '\n';
    return 0;
}

template <backend_scalar T>
int cmd_sample(const Invocation& inv, std::ostream& out) {
    const Phenomenon<T> ph = phenomenon_for(load_spec<T>(inv));
    const T xi1 = scalar_traits<T>::parse(inv.interval[0]);
    const T xi2 = scalar_traits<T>::parse(inv.interval[1]);
    const MonteCarloReport<T> report =
        monte_carlo_theorem1(ph, inv.trials_n, inv.mc_trials, xi1, xi2, inv.seed);
    out << report_to_json(report, inv.precision).dump(2) << '\n';
    return 0;
}

template <backend_scalar T>
int run_typed(const Invocation& inv, std::ostream& out) {
    if (inv.command == "occupancy") return cmd_occupancy<T>(inv, out);
    if (inv.command == "condition") return cmd_condition<T>(inv, out);
    if (inv.command == "posterior") return cmd_posterior<T>(inv, out);
    if (inv.command == "limit") return cmd_limit<T>(inv, out);
    return cmd_sample<T>(inv, out);
}

}  // namespace detail

// Argument vector excludes the program name. Returns the process exit status.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    Invocation inv;
    CLI::App app{"calculus of exchangeable binary phenomena"};
    app.fallthrough(true);
    app.require_subcommand(1);

    app.add_option("--backend", inv.backend, "arithmetic backend")
        ->check(CLI::IsMember({"exact", "float"}))
        ->capture_default_str();
    app.add_option("--depth", inv.depth, "moment depth budget for generated moment inputs")
        ->capture_default_str();
    app.add_option("--seed", inv.seed, "RNG seed for sampling")->capture_default_str();
    app.add_option("--output", inv.output, "output format for tables")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    app.add_option("--precision", inv.precision, "decimal places for rendered values")
        ->check(CLI::Range(1, 17))
        ->capture_default_str();

    CLI::App* occupancy =
        app.add_subcommand("occupancy", "success-count distribution over n trials");
    detail::add_spec_options(occupancy, inv);
    occupancy->add_option("-n,--trials", inv.trials_n, "number of trials")->required();

    CLI::App* condition = app.add_subcommand(
        "condition", "condition on r observed successes and s observed failures");
    detail::add_spec_options(condition, inv);
    condition->add_option("-r,--successes", inv.successes, "observed successes")
        ->capture_default_str();
    condition->add_option("-s,--failures", inv.failures, "observed failures")
        ->capture_default_str();

    CLI::App* posterior =
        app.add_subcommand("posterior", "hypothesis posteriors along a draw sequence");
    detail::add_spec_options(posterior, inv);
    posterior->add_option("evidence", inv.evidence,
                          "draw sequence, W = success, B = failure (empty for priors)");

    CLI::App* limit =
        app.add_subcommand("limit", "limiting frequency distribution and finite-n comparison");
    detail::add_spec_options(limit, inv);
    auto* mode = limit->add_option_group("mode", "what to compute");
    mode->add_option("--interval", inv.interval, "P(xi1 < frequency <= xi2)")
        ->type_size(2)
        ->expected(1)
        ->allow_extra_args(false);
    mode->add_flag("--cdf-grid", inv.cdf_grid, "tabulate the frequency CDF");
    mode->add_option("--posterior-limit", inv.limit_frequency,
                     "long-run hypothesis posterior when the frequency settles at f");
    mode->require_option(1);
    limit->add_option("-n,--horizon", inv.trials_n, "finite horizon for diagnostics")
        ->each([&inv](const std::string&) { inv.n_given = true; });
    limit->add_option("--grid-points", inv.grid_points, "points in a tabulated CDF")
        ->capture_default_str();

    CLI::App* sample =
        app.add_subcommand("sample", "Monte Carlo check of the limiting frequency law");
    detail::add_spec_options(sample, inv);
    sample->add_option("-n,--length", inv.trials_n, "trials per sequence")->required();
    sample->add_option("-T,--trials", inv.mc_trials, "number of sequences")->required();
    sample->add_option("--interval", inv.interval, "target interval (xi1, xi2]")
        ->type_size(2)
        ->expected(1)
        ->allow_extra_args(false)
        ->required();

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        const auto parsed = app.get_subcommands();
        out << (parsed.empty() ? app.help() : parsed.front()->help());
        return 0;
    } catch (const CLI::ParseError& e) {
        err << error_to_json(parse_error(e.what())).dump(2) << '\n';
        return 2;
    }
    inv.command = app.get_subcommands().front()->get_name();

    try {
        if (inv.backend == "float") return detail::run_typed<double>(inv, out);
        return detail::run_typed<Rational>(inv, out);
    } catch (const domain_error& e) {
        err << error_to_json(e).dump(2) << '\n';
        return 3;
    } catch (const error& e) {
        err << error_to_json(e).dump(2) << '\n';
        return 2;
    } catch (const std::exception& e) {
        json doc;
        doc["error"] = {{"kind", "InternalError"}, {"message", e.what()}};
        err << doc.dump(2) << '\n';
        return 2;
    }
}

}  // namespace phenom::cli
