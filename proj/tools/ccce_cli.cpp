// ccce: experiment driver and one-off equilibrium checks.
//
//   ccce run --config exp.json [--methods fcfs,rr-ccce] [--trials 10] ...
//   ccce check --game-file g.json --alpha 0.9 --sigma 1 [--distribution-file z.json]
//   ccce enumerate-pne --game-file g.json --alpha 0.9 --sigma 1

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ccce/equilibrium.hpp"
#include "ccce/game.hpp"
#include "ccce/harness.hpp"

namespace {

using nlohmann::json;

/// Config or I/O problem; reported and mapped to exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw UsageError("error reading " + path);
    return ss.str();
}

std::vector<double> parse_sigma_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != tok.size()) throw UsageError("bad sigma value '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty sigma");
    return out;
}

ccce::UncertaintyModel uncertainty_for(const ccce::FiniteGame& game,
                                       const std::vector<double>& sigma) {
    if (sigma.size() == 1) return ccce::UncertaintyModel::gaussian(game.num_agents(), sigma[0]);
    if (sigma.size() != game.num_agents())
        throw UsageError("sigma needs one value or one per agent");
    return ccce::UncertaintyModel::gaussian(sigma);
}

/// Dense array of masses, or {"flat index": mass, ...}.
ccce::JointDistribution parse_distribution(const std::string& text, std::size_t size) {
    const json doc = json::parse(text);
    std::vector<double> mass(size, 0.0);
    if (doc.is_array()) {
        if (doc.size() != size) throw UsageError("distribution length does not match the game");
        for (std::size_t k = 0; k < size; ++k) mass[k] = doc[k].get<double>();
    } else if (doc.is_object()) {
        for (const auto& [key, value] : doc.items()) {
            const std::size_t k = std::stoul(key);
            if (k >= size) throw UsageError("distribution index " + key + " out of range");
            mass[k] = value.get<double>();
        }
    } else {
        throw UsageError("distribution must be an array or an object");
    }
    return ccce::JointDistribution(std::move(mass));
}

json profile_json(const ccce::FiniteGame& game, ccce::JointIndex flat) {
    json j;
    j["flat"] = flat;
    const auto coords = game.space().unflatten(flat);
    j["coords"] = coords;
    if (!game.labels().empty()) {
        json names = json::array();
        for (std::size_t i = 0; i < coords.size(); ++i) names.push_back(game.labels()[i][coords[i]]);
        j["labels"] = names;
    }
    return j;
}

json margin_json(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json report_json(const ccce::FeasibilityReport& r) {
    json j;
    j["feasible"] = r.feasible;
    j["worst_margin"] = margin_json(r.worst_margin);
    if (r.worst)
        j["worst_constraint"] = {{"agent", r.worst->agent},
                                 {"recommended", r.worst->recommended},
                                 {"alternative", r.worst->alternative}};
    return j;
}

struct GameArgs {
    std::string game_file;
    double alpha = 0.9;
    std::string sigma = "0";
};

void add_game_args(CLI::App* cmd, GameArgs& args) {
    cmd->add_option("--game-file", args.game_file, "Game JSON")->required();
    cmd->add_option("--alpha", args.alpha, "Confidence level in (0,1)");
    cmd->add_option("--sigma", args.sigma, "Perturbation std, scalar or per-agent list a,b,...");
}

int cmd_check(const GameArgs& args, const std::string& dist_file) {
    const auto game = ccce::parse_game_json(read_file(args.game_file));
    const auto unc = uncertainty_for(game, parse_sigma_list(args.sigma));
    const ccce::Confidence conf(args.alpha);

    json out;
    out["alpha"] = args.alpha;
    out["thresholds"] = unc.thresholds(args.alpha);
    if (!dist_file.empty()) {
        const auto z = parse_distribution(read_file(dist_file), game.joint_size());
        out["ccce"] = report_json(ccce::check_ccce_feasibility(game, z, unc, conf));
        out["ce"] = report_json(ccce::check_ce_feasibility(game, z));
    } else {
        // No distribution given: find the social-cost optimal CC-CE, if any.
        std::vector<double> social(game.joint_size(), 0.0);
        for (std::size_t i = 0; i < game.num_agents(); ++i)
            for (std::size_t x = 0; x < game.joint_size(); ++x) social[x] += game.cost(i, x);
        const auto sol = ccce::solve_full_ccce(game, unc, conf, social);
        out["feasible"] = sol.ok();
        if (sol.ok()) {
            out["objective"] = sol.objective;
            json support = json::array();
            for (auto x : sol.distribution->support()) {
                auto p = profile_json(game, x);
                p["mass"] = (*sol.distribution)[x];
                support.push_back(p);
            }
            out["support"] = support;
        }
    }
    std::cout << out.dump(2) << '\n';
    return 0;
}

int cmd_enumerate(const GameArgs& args, std::size_t limit) {
    const auto game = ccce::parse_game_json(read_file(args.game_file));
    const auto unc = uncertainty_for(game, parse_sigma_list(args.sigma));
    ccce::EnumerationOptions options;
    if (limit > 0) options.limit = limit;
    const auto set = ccce::enumerate_cc_pne(game, unc, ccce::Confidence(args.alpha), options);
    json out;
    out["alpha"] = set.alpha_used;
    out["truncated"] = set.truncated;
    json profiles = json::array();
    for (auto x : set.profiles) profiles.push_back(profile_json(game, x));
    out["profiles"] = profiles;
    std::cout << out.dump(2) << '\n';
    return 0;
}

struct RunArgs {
    std::string config;
    std::string methods;
    std::size_t trials = 0;
    std::string flights;
    std::optional<double> alpha;
    std::string sigma;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::optional<double> time_budget;
};

int cmd_run(const RunArgs& a) {
    using namespace ccce::harness;
    ExperimentConfig config;
    if (!a.config.empty()) config = config_from_json(read_file(a.config));
    if (!a.methods.empty()) config.methods = parse_methods(a.methods);
    if (a.trials > 0) config.num_trials = a.trials;
    if (!a.flights.empty()) config.flight_counts = parse_flight_counts(a.flights);
    if (a.alpha) config.alpha = *a.alpha;
    if (!a.sigma.empty()) config.sigma = parse_sigma_list(a.sigma);
    if (a.seed) config.master_seed = *a.seed;
    if (a.time_budget) config.time_budget_seconds = *a.time_budget;
    config.validate();

    std::ofstream file;
    std::ostream* csv = &std::cout;
    if (!a.out.empty()) {
        file.open(a.out, std::ios::trunc);
        if (!file) throw UsageError("cannot open " + a.out + " for writing");
        csv = &file;
    }
    const auto result = run_experiment(config, csv);
    if (file.is_open()) {
        file.close();
        if (!file) throw UsageError("error writing " + a.out);
    }
    print_summary(std::cerr, result.summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chance-constrained correlated equilibria for departure metering"};
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Run a Monte Carlo experiment and write CSV");
    run_cmd->add_option("--config", run.config, "Experiment config JSON");
    run_cmd->add_option("--methods", run.methods, "fcfs,full-ccce,rr-nominal,rr-ccce");
    run_cmd->add_option("--trials", run.trials, "Trials per flight count");
    run_cmd->add_option("--flights", run.flights, "Flight counts: 6..14, 6,8 or 9");
    run_cmd->add_option("--alpha", run.alpha, "Confidence level");
    run_cmd->add_option("--sigma", run.sigma, "Perturbation std, scalar or per-airline list");
    run_cmd->add_option("--seed", run.seed, "Master seed");
    run_cmd->add_option("--out", run.out, "CSV output path (default stdout)");
    run_cmd->add_option("--time-budget", run.time_budget, "Seconds per solve");

    GameArgs check;
    std::string dist_file;
    auto* check_cmd = app.add_subcommand("check", "CC-CE feasibility of a distribution, or of the game");
    add_game_args(check_cmd, check);
    check_cmd->add_option("--distribution-file", dist_file,
                          "Masses as a dense array or {\"flat\": mass}");

    GameArgs enumerate;
    std::size_t limit = 0;
    auto* enum_cmd = app.add_subcommand("enumerate-pne", "List CC-PNE profiles");
    add_game_args(enum_cmd, enumerate);
    enum_cmd->add_option("--limit", limit, "Keep the first N profiles (0 = all)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (*check_cmd) return cmd_check(check, dist_file);
        if (*enum_cmd) return cmd_enumerate(enumerate, limit);
    } catch (const UsageError& e) {
        std::cerr << "ccce: " << e.what() << '\n';
        return 1;
    } catch (const json::exception& e) {
        std::cerr << "ccce: malformed JSON: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ccce: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "ccce: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
