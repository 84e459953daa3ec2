// Command-line front end: model validation, dissipativity, stabilization,
// exact chain analysis and Monte Carlo simulation. JSON on stdout, human
// diagnostics on stderr. Exit codes: 0 ok, 1 domain error, 2 usage error.

#include "sandpile/exact.hpp"
#include "sandpile/json_io.hpp"
#include "sandpile/montecarlo.hpp"
#include "sandpile/presets.hpp"
#include "sandpile/stabilize.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace {

using nlohmann::json;
using namespace sandpile;

constexpr const char* kVersion = "0.1.0";

std::vector<Rational> parse_rational_list(const std::string& text) {
    std::vector<Rational> values;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        values.push_back(parse_rational(token));
    }
    return values;
}

AdditionDistribution resolve_mu(const ModelFile& file, const std::string& mu_flag,
                                bool allow_uniform = false) {
    if (!mu_flag.empty()) {
        return validate_mu(file.model.n_sites, parse_rational_list(mu_flag));
    }
    if (file.mu) {
        return *file.mu;
    }
    if (allow_uniform && file.model.n_sites > 0) {
        std::vector<Rational> w(static_cast<std::size_t>(file.model.n_sites),
                                Rational(1, file.model.n_sites));
        return AdditionDistribution{std::move(w)};
    }
    throw ParseError("no addition distribution: pass --mu or put \"mu\" in the model file");
}

SiteSelectionPolicy resolve_policy(const std::string& name, std::uint64_t seed) {
    if (name == "smallest") return SiteSelectionPolicy::smallest_index();
    if (name == "largest") return SiteSelectionPolicy::largest_index();
    if (name == "most-grains") return SiteSelectionPolicy::most_grains();
    if (name == "round-robin") return SiteSelectionPolicy::round_robin();
    if (name == "random") return SiteSelectionPolicy::seeded_random(seed);
    throw ParseError("unknown policy '" + name + "'");
}

json states_json(const std::vector<Config>& states) {
    json out = json::array();
    for (const auto& s : states) {
        out.push_back(s);
    }
    return out;
}

json stable_states_json(const StateIndex& index) {
    json out = json::array();
    for (std::size_t i = 0; i < index.n_stable; ++i) {
        out.push_back(index.states[i]);
    }
    return out;
}

void emit(const json& payload) {
    std::cout << payload.dump(2) << "\n";
}

json schema_for(const std::string& subcommand) {
    static const std::map<std::string, json> schemas = {
        {"validate", {{"status", "ok"}, {"n_sites", "int"}, {"thresholds", "[int]"}}},
        {"depth",
         {{"satisfied", "bool"},
          {"depth", "int"},
          {"layers", "[[site]]"},
          {"witness", "[site] (only when unsatisfied)"}}},
        {"stabilize",
         {{"configuration", "[int]"},
          {"counters", "[int]"},
          {"topplings", "int"},
          {"log", "[{site, card_position, delta}] (with --log)"}}},
        {"matrix",
         {{"states", "[[int]] stable states, lexicographic"},
          {"extended", "{states, A, B, C, D} (with --extended)"},
          {"collapsed", "[[p/q]] (with --collapsed)"},
          {"per_site", "[[p/q]] (with --per-site k)"}}},
        {"stationary", {{"states", "[[int]] class members"}, {"pi", "[p/q]"}}},
        {"commute", {{"holds", "bool"}, {"max_abs_difference", "p/q"}}},
        {"classes",
         {{"states", "[[int]]"},
          {"classes", "[{members, recurrent, period}]"}}},
        {"mu-independence",
         {{"holds", "bool"}, {"recurrent_class", "[[int]]"}, {"pi", "[[p/q]]"}}},
        {"simulate",
         {{"steps", "int"},
          {"burn_in", "int"},
          {"seed", "int"},
          {"states", "[[int]]"},
          {"counts", "[int]"},
          {"frequencies", "[p/q]"},
          {"tv_distance", "p/q (with --compare-exact)"},
          {"pi", "[p/q] (with --compare-exact)"}}},
        {"preset", {{"n_sites", "int"}, {"topplings", "[[{delta, prob}]]"}, {"mu", "[p/q]"}}},
    };
    auto it = schemas.find(subcommand);
    if (it == schemas.end()) {
        throw ParseError("no schema for subcommand '" + subcommand + "'");
    }
    return it->second;
}

int run(int argc, char** argv) {
    CLI::App app{"Stochastic sandpile toolkit: exact chain analysis and simulation"};
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", kVersion);

    std::string schema_name;
    app.add_option("--schema", schema_name, "Print the JSON payload schema of a subcommand");

    // Shared option storage.
    std::string model_path, eta_text, mu_text, policy_name = "smallest", class_spec = "max";
    std::string mu_list_path;
    std::uint64_t seed = 0;
    std::int64_t fuel = -1;
    bool want_log = false, as_float = false, want_extended = false, want_collapsed = false;
    int per_site = 0;
    std::uint64_t steps = 0, burn_in_opt = static_cast<std::uint64_t>(-1), replicas = 1;
    bool compare_exact = false;
    int jobs = 1;
    app.add_option("--jobs", jobs, "Worker hint (current implementation is sequential)");

    auto* validate_cmd = app.add_subcommand("validate", "Validate a model file");
    validate_cmd->add_option("model", model_path)->required();

    auto* depth_cmd = app.add_subcommand("depth", "Dissipativity report with layers and depth");
    depth_cmd->add_option("model", model_path)->required();

    auto* stabilize_cmd = app.add_subcommand("stabilize", "Stabilize a configuration");
    stabilize_cmd->add_option("model", model_path)->required();
    stabilize_cmd->add_option("--eta", eta_text, "Configuration, e.g. 3,1")->required();
    stabilize_cmd->add_option("--seed", seed);
    stabilize_cmd->add_option("--policy", policy_name,
                              "smallest|largest|most-grains|round-robin|random");
    stabilize_cmd->add_option("--fuel", fuel);
    stabilize_cmd->add_flag("--log", want_log, "Include the toppling log");

    auto* matrix_cmd = app.add_subcommand("matrix", "Exact transition matrices");
    matrix_cmd->add_option("model", model_path)->required();
    matrix_cmd->add_flag("--extended", want_extended);
    matrix_cmd->add_flag("--collapsed", want_collapsed);
    matrix_cmd->add_option("--per-site", per_site, "Per-site matrix P^(k)");
    matrix_cmd->add_option("--mu", mu_text, "Addition law, e.g. 1/3,2/3");
    matrix_cmd->add_flag("--float", as_float);

    auto* stationary_cmd = app.add_subcommand("stationary", "Exact stationary distribution");
    stationary_cmd->add_option("model", model_path)->required();
    stationary_cmd->add_option("--mu", mu_text);
    stationary_cmd->add_option("--class", class_spec, "max (default) or a recurrent class index");
    stationary_cmd->add_flag("--float", as_float);

    auto* commute_cmd = app.add_subcommand("commute", "Check P^(k) P^(l) = P^(l) P^(k)");
    commute_cmd->add_option("model", model_path)->required();

    auto* classes_cmd = app.add_subcommand("classes", "Recurrent/transient classes and periods");
    classes_cmd->add_option("model", model_path)->required();
    classes_cmd->add_option("--mu", mu_text);

    auto* mu_indep_cmd = app.add_subcommand("mu-independence",
                                            "Compare stationary distributions across mu");
    mu_indep_cmd->add_option("model", model_path)->required();
    mu_indep_cmd->add_option("--mu-list", mu_list_path, "JSON file: [[\"p/q\",...], ...]")
        ->required();

    auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo chain run");
    simulate_cmd->add_option("model", model_path)->required();
    simulate_cmd->add_option("--steps", steps)->required();
    simulate_cmd->add_option("--burn-in", burn_in_opt, "Default steps/100");
    simulate_cmd->add_option("--seed", seed);
    simulate_cmd->add_option("--replicas", replicas);
    simulate_cmd->add_option("--mu", mu_text);
    simulate_cmd->add_option("--policy", policy_name);
    simulate_cmd->add_flag("--compare-exact", compare_exact,
                           "Report TV distance to the exact stationary distribution");

    auto* preset_cmd = app.add_subcommand("preset", "Emit a ready-made model file");
    std::string preset_kind, routing_path, graph_path, null_mode = "renormalize";
    std::string alpha_text, beta_text, gamma_text, p_text, a_text = "1/3";
    preset_cmd
        ->add_option("kind", preset_kind,
                     "single-grain|bssm|paper-triangle-ssm|paper-triangle-asm")
        ->required();
    preset_cmd->add_option("--routing", routing_path, "single-grain routing file");
    preset_cmd->add_option("--graph", graph_path, "bssm multigraph file");
    preset_cmd->add_option("--p", p_text, "bssm edge-firing probability");
    preset_cmd->add_option("--null", null_mode, "renormalize (default) or reject");
    preset_cmd->add_option("--alpha", alpha_text);
    preset_cmd->add_option("--beta", beta_text);
    preset_cmd->add_option("--gamma", gamma_text);
    preset_cmd->add_option("--a", a_text, "paper-triangle-ssm: mu weight of the first site");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help / --version
            return app.exit(e);
        }
        app.exit(e);
        return 2;
    }

    try {
        if (!schema_name.empty()) {
            emit(schema_for(schema_name));
            return 0;
        }
        if (app.get_subcommands().empty()) {
            std::cerr << app.help();
            return 2;
        }

        if (validate_cmd->parsed()) {
            auto file = load_model_file(model_path);
            emit({{"status", "ok"},
                  {"n_sites", file.model.n_sites},
                  {"thresholds", file.model.thresholds}});
            return 0;
        }

        if (depth_cmd->parsed()) {
            auto file = load_model_file(model_path);
            auto report = dissipativity(file.model);
            json payload{{"satisfied", report.satisfied},
                         {"depth", report.depth},
                         {"layers", report.layers}};
            if (!report.satisfied) {
                payload["witness"] = report.witness;
            }
            emit(payload);
            return 0;
        }

        if (stabilize_cmd->parsed()) {
            auto file = load_model_file(model_path);
            Config eta = parse_config(eta_text);
            validate_config(file.model, eta);
            auto decks = DeckSource::seeded(file.model, seed);
            auto result = deterministic_stabilize(file.model, with_zero_counters(eta), decks,
                                                  resolve_policy(policy_name, seed), fuel);
            json payload{{"configuration", result.state.grains},
                         {"counters", result.state.counters},
                         {"topplings", result.log.size()}};
            if (want_log) {
                json log = json::array();
                for (const auto& entry : result.log) {
                    log.push_back({{"site", entry.site},
                                   {"card_position", entry.card_position},
                                   {"delta", entry.card.delta}});
                }
                payload["log"] = std::move(log);
            }
            emit(payload);
            return 0;
        }

        if (matrix_cmd->parsed()) {
            auto file = load_model_file(model_path);
            ExactSolver solver(file.model);
            json payload{{"states", stable_states_json(solver.index())}};
            if (want_extended) {
                auto mu = resolve_mu(file, mu_text);
                auto blocks = build_extended(file.model, mu, solver.index());
                payload["extended"] = {{"states", states_json(solver.index().states)},
                                       {"A", matrix_to_json(blocks.A, as_float)},
                                       {"B", matrix_to_json(blocks.B, as_float)},
                                       {"C", matrix_to_json(blocks.C, as_float)},
                                       {"D", matrix_to_json(blocks.D, as_float)}};
            }
            if (want_collapsed) {
                auto mu = resolve_mu(file, mu_text);
                payload["collapsed"] = matrix_to_json(solver.collapse(mu), as_float);
            }
            if (per_site > 0) {
                payload["per_site"] = matrix_to_json(solver.per_site_matrix(per_site), as_float);
            }
            emit(payload);
            return 0;
        }

        if (stationary_cmd->parsed()) {
            auto file = load_model_file(model_path);
            ExactSolver solver(file.model);
            auto mu = resolve_mu(file, mu_text);
            auto p = solver.collapse(mu);
            auto decomposition = chain_decomposition(p);
            std::size_t cls_id;
            if (class_spec == "max") {
                cls_id = decomposition.class_of[solver.maximal_state_index()];
            } else {
                cls_id = std::stoul(class_spec);
            }
            if (cls_id >= decomposition.classes.size() || !decomposition.recurrent[cls_id]) {
                throw SingularSystem("selected class is not a recurrent class");
            }
            const auto& cls = decomposition.classes[cls_id];
            auto pi = stationary(p, cls);
            json members = json::array();
            for (auto i : cls) {
                members.push_back(solver.index().states[i]);
            }
            emit({{"states", std::move(members)}, {"pi", rational_vector_to_json(pi, as_float)}});
            return 0;
        }

        if (commute_cmd->parsed()) {
            auto file = load_model_file(model_path);
            auto report = commute_check(file.model);
            json payload{{"holds", report.holds},
                         {"max_abs_difference", format_rational(report.max_abs_difference)}};
            if (!report.holds) {
                payload["site_a"] = report.site_a;
                payload["site_b"] = report.site_b;
            }
            emit(payload);
            return 0;
        }

        if (classes_cmd->parsed()) {
            auto file = load_model_file(model_path);
            ExactSolver solver(file.model);
            auto mu = resolve_mu(file, mu_text, /*allow_uniform=*/true);
            auto p = solver.collapse(mu);
            auto decomposition = chain_decomposition(p);
            json classes = json::array();
            for (std::size_t c = 0; c < decomposition.classes.size(); ++c) {
                json members = json::array();
                for (auto i : decomposition.classes[c]) {
                    members.push_back(solver.index().states[i]);
                }
                classes.push_back({{"members", std::move(members)},
                                   {"recurrent", static_cast<bool>(decomposition.recurrent[c])},
                                   {"period", decomposition.periods[c]}});
            }
            emit({{"states", stable_states_json(solver.index())}, {"classes", std::move(classes)}});
            return 0;
        }

        if (mu_indep_cmd->parsed()) {
            auto file = load_model_file(model_path);
            std::ifstream in(mu_list_path);
            if (!in) {
                throw ParseError("cannot open mu list '" + mu_list_path + "'");
            }
            json list;
            in >> list;
            std::vector<AdditionDistribution> mus;
            for (const auto& entry : list) {
                std::vector<Rational> weights;
                for (const auto& w : entry) {
                    weights.push_back(parse_rational(w.get<std::string>()));
                }
                mus.push_back(validate_mu(file.model.n_sites, std::move(weights)));
            }
            auto report = mu_independence(file.model, mus);
            ExactSolver solver(file.model);
            json members = json::array();
            for (auto i : report.recurrent_class) {
                members.push_back(solver.index().states[i]);
            }
            json pis = json::array();
            for (const auto& pi : report.pis) {
                pis.push_back(rational_vector_to_json(pi));
            }
            emit({{"holds", report.holds},
                  {"recurrent_class", std::move(members)},
                  {"pi", std::move(pis)}});
            return 0;
        }

        if (simulate_cmd->parsed()) {
            auto file = load_model_file(model_path);
            auto mu = resolve_mu(file, mu_text);
            std::uint64_t burn = burn_in_opt == static_cast<std::uint64_t>(-1) ? steps / 100
                                                                               : burn_in_opt;
            auto policy = resolve_policy(policy_name, seed);
            std::vector<OccupancyReport> reports;
            for (std::uint64_t r = 0; r < replicas; ++r) {
                reports.push_back(simulate(file.model, mu, steps, burn, seed + r, policy));
            }
            auto report = merge(reports);
            auto freq = report.frequencies();
            json payload{{"steps", report.steps},
                         {"burn_in", report.burn_in},
                         {"seed", seed},
                         {"replicas", replicas},
                         {"states", states_json(report.states)},
                         {"counts", report.counts},
                         {"frequencies", rational_vector_to_json(freq, /*as_float=*/true)}};
            if (compare_exact) {
                ExactSolver solver(file.model);
                auto p = solver.collapse(mu);
                auto decomposition = chain_decomposition(p);
                const auto& cls =
                    decomposition.classes[decomposition.class_of[solver.maximal_state_index()]];
                auto pi = stationary(p, cls);
                // Compare over all stable states, pi extended by zeros.
                std::vector<Rational> pi_full(report.states.size(), Rational(0));
                for (std::size_t i = 0; i < cls.size(); ++i) {
                    pi_full[cls[i]] = pi[i];
                }
                payload["pi"] = rational_vector_to_json(pi_full);
                payload["tv_distance"] = format_rational(tv_distance(freq, pi_full));
            }
            emit(payload);
            return 0;
        }

        if (preset_cmd->parsed()) {
            SandpileModel model;
            std::optional<AdditionDistribution> mu;
            if (preset_kind == "single-grain") {
                std::ifstream in(routing_path);
                if (!in) {
                    throw ParseError("cannot open routing file '" + routing_path + "'");
                }
                json j;
                in >> j;
                int n = j.at("n_sites").get<int>();
                std::vector<std::vector<Rational>> routing;
                for (const auto& row : j.at("routing")) {
                    std::vector<Rational> r;
                    for (const auto& w : row) {
                        r.push_back(parse_rational(w.get<std::string>()));
                    }
                    routing.push_back(std::move(r));
                }
                model = single_grain_model(n, routing);
            } else if (preset_kind == "bssm") {
                std::ifstream in(graph_path);
                if (!in) {
                    throw ParseError("cannot open graph file '" + graph_path + "'");
                }
                json j;
                in >> j;
                auto policy = null_mode == "reject" ? NullTopplingPolicy::Reject
                                                    : NullTopplingPolicy::Renormalize;
                model = bssm_model(multigraph_from_json(j), parse_rational(p_text), policy);
            } else if (preset_kind == "paper-triangle-ssm") {
                auto fixture = paper_triangle_ssm(parse_rational(alpha_text),
                                                  parse_rational(beta_text),
                                                  parse_rational(gamma_text),
                                                  parse_rational(a_text));
                model = std::move(fixture.model);
                mu = std::move(fixture.mu);
            } else if (preset_kind == "paper-triangle-asm") {
                auto fixture = paper_triangle_asm(parse_rational(alpha_text));
                model = std::move(fixture.model);
                mu = std::move(fixture.mu);
            } else {
                throw ParseError("unknown preset '" + preset_kind + "'");
            }
            emit(model_to_json(model, mu));
            return 0;
        }

        std::cerr << app.help();
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace

int main(int argc, char** argv) {
    return run(argc, argv);
}
