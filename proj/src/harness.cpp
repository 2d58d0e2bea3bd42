#include "ccce/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace ccce::harness {

const char* to_string(Method m) {
    switch (m) {
        case Method::fcfs: return "fcfs";
        case Method::full_ccce: return "full-ccce";
        case Method::rr_nominal: return "rr-nominal";
        case Method::rr_ccce: return "rr-ccce";
    }
    return "fcfs";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::fcfs, Method::full_ccce, Method::rr_nominal, Method::rr_ccce})
        if (name == to_string(m)) return m;
    throw std::invalid_argument("unknown method: " + std::string(name));
}

std::vector<Method> parse_methods(std::string_view list) {
    std::vector<Method> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const auto comma = list.find(',', pos);
        const auto token = list.substr(pos, comma == std::string_view::npos ? list.npos : comma - pos);
        if (!token.empty()) out.push_back(parse_method(token));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    if (out.empty()) throw std::invalid_argument("no methods given");
    return out;
}

namespace {

std::size_t parse_count(std::string_view s) {
    std::size_t value = 0;
    if (s.empty()) throw std::invalid_argument("empty flight count");
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("bad flight count: " + std::string(s));
        value = value * 10 + static_cast<std::size_t>(c - '0');
    }
    return value;
}

}  // namespace

std::vector<std::size_t> parse_flight_counts(std::string_view text) {
    std::vector<std::size_t> out;
    if (const auto dots = text.find(".."); dots != std::string_view::npos) {
        const std::size_t lo = parse_count(text.substr(0, dots));
        const std::size_t hi = parse_count(text.substr(dots + 2));
        if (lo > hi) throw std::invalid_argument("empty flight range");
        for (std::size_t f = lo; f <= hi; ++f) out.push_back(f);
        return out;
    }
    std::size_t pos = 0;
    for (;;) {
        const auto comma = text.find(',', pos);
        out.push_back(parse_count(text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

void ExperimentConfig::validate() const {
    if (methods.empty()) throw std::invalid_argument("no methods configured");
    if (num_trials < 1) throw std::invalid_argument("num_trials must be at least 1");
    if (flight_counts.empty()) throw std::invalid_argument("no flight counts configured");
    if (num_airlines < 1) throw std::invalid_argument("need at least one airline");
    for (std::size_t f : flight_counts)
        if (f < num_airlines)
            throw std::invalid_argument("flight count " + std::to_string(f) +
                                        " is below the airline count " +
                                        std::to_string(num_airlines));
    Confidence{alpha};
    if (sigma.empty() || (sigma.size() != 1 && sigma.size() != num_airlines))
        throw std::invalid_argument("sigma must be a scalar or one value per airline");
    for (double s : sigma)
        if (!(s >= 0.0) || !std::isfinite(s)) throw std::invalid_argument("sigma must be nonnegative");
    if (!(time_budget_seconds > 0.0)) throw std::invalid_argument("time budget must be positive");
    scenario.validate();
}

UncertaintyModel ExperimentConfig::uncertainty() const {
    if (sigma.size() == 1) return UncertaintyModel::gaussian(num_airlines, sigma.front());
    return UncertaintyModel::gaussian(sigma);
}

namespace {

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string ExperimentConfig::sigma_label() const {
    std::string out;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (i) out += ';';
        out += format_number(sigma[i]);
    }
    return out;
}

ExperimentConfig config_from_json(std::string_view text) {
    using nlohmann::json;
    try {
        const json doc = json::parse(text);
        ExperimentConfig c;
        if (doc.contains("methods")) {
            const auto& m = doc.at("methods");
            if (m.is_string()) {
                c.methods = parse_methods(m.get<std::string>());
            } else {
                c.methods.clear();
                for (const auto& name : m) c.methods.push_back(parse_method(name.get<std::string>()));
            }
        }
        c.num_trials = doc.value("trials", c.num_trials);
        if (doc.contains("flights")) {
            const auto& f = doc.at("flights");
            c.flight_counts = f.is_string() ? parse_flight_counts(f.get<std::string>())
                              : f.is_number() ? std::vector<std::size_t>{f.get<std::size_t>()}
                                              : f.get<std::vector<std::size_t>>();
        }
        c.num_airlines = doc.value("num_airlines", c.num_airlines);
        c.alpha = doc.value("alpha", c.alpha);
        const json* sigma = nullptr;
        if (doc.contains("uncertainty") && doc.at("uncertainty").contains("sigma"))
            sigma = &doc.at("uncertainty").at("sigma");
        else if (doc.contains("sigma"))
            sigma = &doc.at("sigma");
        if (sigma)
            c.sigma = sigma->is_number() ? std::vector<double>{sigma->get<double>()}
                                         : sigma->get<std::vector<double>>();
        c.master_seed = doc.value("seed", c.master_seed);
        c.time_budget_seconds = doc.value("time_budget", c.time_budget_seconds);
        if (doc.contains("pne_limit") && !doc.at("pne_limit").is_null())
            c.pne_limit = doc.at("pne_limit").get<std::size_t>();
        c.threads = doc.value("threads", c.threads);
        if (doc.contains("scenario")) c.scenario = vq::params_from_json(doc.at("scenario").dump());
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed experiment config: ") + e.what());
    }
}

const char* to_string(TrialStatus s) {
    switch (s) {
        case TrialStatus::ok: return "ok";
        case TrialStatus::infeasible: return "infeasible";
        case TrialStatus::timeout: return "timeout";
        case TrialStatus::solver_failure: return "solver-failure";
    }
    return "ok";
}

DeviationOutcome simulate_deviation(const FiniteGame& game, const JointDistribution& z,
                                    JointIndex recommendation, const std::vector<double>& eta) {
    if (eta.size() != game.num_agents())
        throw std::invalid_argument("need one perturbation per agent");
    if (recommendation >= game.joint_size())
        throw std::invalid_argument("recommendation out of range");
    const auto& space = game.space();
    DeviationOutcome out{recommendation, false};
    for (std::size_t i = 0; i < game.num_agents(); ++i) {
        const std::size_t rec = space.coord(recommendation, i);
        const double p = marginal(game, z, i, rec);
        // Margins are compared in the probability-weighted form with the same
        // tolerance as the feasibility replay, so LP round-off does not read
        // as a deviation.
        std::size_t best = rec;
        double best_margin = kFeasibilityTolerance;
        for (std::size_t alt = 0; alt < space.count(i); ++alt) {
            if (alt == rec) continue;
            const double margin =
                p > 0.0 ? weighted_deviation(game, z, i, rec, alt) + eta[i] * p : eta[i];
            if (margin > best_margin) {
                best_margin = margin;
                best = alt;
            }
        }
        if (best != rec) {
            out.final_action = space.with_action(out.final_action, i, best);
            out.deviated = true;
        }
    }
    return out;
}

DeviationOutcome simulate_deviation(const FiniteGame& game, const JointDistribution& z,
                                    JointIndex recommendation, const UncertaintyModel& unc,
                                    Rng& rng) {
    if (unc.size() != game.num_agents())
        throw std::invalid_argument("uncertainty model must have one entry per agent");
    std::vector<double> eta;
    eta.reserve(unc.size());
    for (const auto& d : unc.per_agent) eta.push_back(sample(d, rng));
    return simulate_deviation(game, z, recommendation, eta);
}

namespace {

enum Stream : std::uint64_t { kInstance = 1, kRecommendation = 2, kPerturbation = 3 };

std::uint64_t cell_key(std::size_t num_flights, std::uint64_t stream) {
    return (static_cast<std::uint64_t>(num_flights) << 32) ^ stream;
}

}  // namespace

std::uint64_t instance_seed(const ExperimentConfig& config, std::size_t trial,
                            std::size_t num_flights) {
    return derive_seed(config.master_seed, trial, cell_key(num_flights, kInstance));
}

std::uint64_t recommendation_seed(const ExperimentConfig& config, std::size_t trial,
                                  std::size_t num_flights) {
    return derive_seed(config.master_seed, trial, cell_key(num_flights, kRecommendation));
}

std::uint64_t perturbation_seed(const ExperimentConfig& config, std::size_t trial,
                                std::size_t num_flights, std::size_t agent) {
    return derive_seed(config.master_seed, trial, cell_key(num_flights, kPerturbation), agent);
}

std::vector<double> draw_perturbations(const ExperimentConfig& config, std::size_t trial,
                                       std::size_t num_flights) {
    const auto unc = config.uncertainty();
    std::vector<double> eta;
    eta.reserve(unc.size());
    for (std::size_t i = 0; i < unc.size(); ++i) {
        Rng rng(perturbation_seed(config, trial, num_flights, i));
        eta.push_back(sample(unc.per_agent[i], rng));
    }
    return eta;
}

vq::VqInstance trial_instance(const ExperimentConfig& config, std::size_t trial,
                              std::size_t num_flights) {
    return vq::generate_instance(num_flights, config.num_airlines,
                                 instance_seed(config, trial, num_flights), config.scenario);
}

TrialRecord run_trial_on(const ExperimentConfig& config, const vq::VqInstance& inst,
                         const vq::VqGame& built, std::size_t trial_index, Method method) {
    using clock = std::chrono::steady_clock;
    TrialRecord rec;
    rec.trial_index = trial_index;
    rec.method = method;
    rec.num_flights = inst.num_flights();
    rec.alpha = config.alpha;
    rec.sigma = config.sigma_label();

    const auto& game = built.game;
    const auto truth = config.uncertainty();
    const Confidence conf(config.alpha);
    const auto budget = std::chrono::duration<double>(config.time_budget_seconds);

    std::optional<JointDistribution> z;
    const auto start = clock::now();
    const auto deadline = start + std::chrono::duration_cast<clock::duration>(budget);
    try {
        switch (method) {
            case Method::fcfs: {
                z = JointDistribution::point_mass(game.joint_size(),
                                                  game.space().flat_index(vq::fcfs_profile(inst)));
                break;
            }
            case Method::full_ccce: {
                lp::SolveOptions options;
                options.deadline = deadline;
                auto sol = solve_full_ccce(game, truth, conf, built.sys_cost, options);
                if (!sol.ok()) {
                    rec.status = TrialStatus::infeasible;
                    rec.message = "CC-CE program infeasible";
                    break;
                }
                rec.planned_objective = sol.objective;
                z = std::move(sol.distribution);
                break;
            }
            case Method::rr_nominal:
            case Method::rr_ccce: {
                EnumerationOptions options;
                options.limit = config.pne_limit;
                options.deadline = deadline;
                const auto unc = method == Method::rr_nominal
                                     ? UncertaintyModel::nominal(game.num_agents())
                                     : truth;
                const auto pne = enumerate_cc_pne(game, unc, conf, options);
                rec.rr_size_d = pne.size();
                auto sol = solve_reduced_rank(game, pne, built.sys_cost);
                if (!sol.ok()) {
                    rec.status = TrialStatus::infeasible;
                    rec.message = "no CC-PNE at this confidence level";
                    break;
                }
                rec.planned_objective = sol.objective;
                z = std::move(sol.induced);
                break;
            }
        }
    } catch (const lp::SolveTimeout& e) {
        rec.status = TrialStatus::timeout;
        rec.message = e.what();
    } catch (const lp::SolverFailure& e) {
        rec.status = TrialStatus::solver_failure;
        rec.message = e.what();
    } catch (const BudgetExceeded& e) {
        rec.status = TrialStatus::solver_failure;
        rec.message = e.what();
    }
    rec.solve_seconds = std::chrono::duration<double>(clock::now() - start).count();
    if (rec.status == TrialStatus::ok && rec.solve_seconds > config.time_budget_seconds) {
        rec.status = TrialStatus::timeout;
        rec.message = "solve exceeded the time budget";
    }
    if (rec.status != TrialStatus::ok) return rec;

    Rng rng(recommendation_seed(config, trial_index, inst.num_flights()));
    const JointIndex x = sample_recommendation(*z, rng);
    const auto outcome =
        simulate_deviation(game, *z, x, draw_perturbations(config, trial_index, inst.num_flights()));
    rec.recommendation = x;
    rec.final_action = outcome.final_action;
    rec.deviated = outcome.deviated;
    rec.delay_cost = built.sys_cost[outcome.final_action];
    return rec;
}

namespace {

TrialRecord failed_record(const ExperimentConfig& config, std::size_t trial, std::size_t num_flights,
                          Method method, std::string message) {
    TrialRecord rec;
    rec.trial_index = trial;
    rec.method = method;
    rec.num_flights = num_flights;
    rec.alpha = config.alpha;
    rec.sigma = config.sigma_label();
    rec.status = TrialStatus::solver_failure;
    rec.message = std::move(message);
    return rec;
}

std::vector<TrialRecord> run_cell(const ExperimentConfig& config, std::size_t trial,
                                  std::size_t num_flights) {
    std::vector<TrialRecord> out;
    const auto inst = trial_instance(config, trial, num_flights);
    std::optional<vq::VqGame> built;
    std::string failure;
    try {
        built = vq::build_game(inst);
    } catch (const BudgetExceeded& e) {
        failure = e.what();
    }
    for (Method m : config.methods)
        out.push_back(built ? run_trial_on(config, inst, *built, trial, m)
                            : failed_record(config, trial, num_flights, m, failure));
    return out;
}

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CCCE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 1;
}

}  // namespace

TrialRecord run_trial(const ExperimentConfig& config, std::size_t trial_index,
                      std::size_t num_flights, Method method) {
    config.validate();
    const auto inst = trial_instance(config, trial_index, num_flights);
    try {
        const auto built = vq::build_game(inst);
        return run_trial_on(config, inst, built, trial_index, method);
    } catch (const BudgetExceeded& e) {
        return failed_record(config, trial_index, num_flights, method, e.what());
    }
}

std::string csv_row(const TrialRecord& r) {
    std::string row = std::to_string(r.trial_index);
    row += ',';
    row += to_string(r.method);
    row += ',' + std::to_string(r.num_flights);
    row += ',' + format_number(r.alpha);
    row += ',' + r.sigma;
    row += ',';
    row += to_string(r.status);
    row += ',' + format_number(r.solve_seconds);
    row += ',';
    if (r.delay_cost) row += format_number(*r.delay_cost);
    row += ',';
    if (r.status == TrialStatus::ok) row += r.deviated ? '1' : '0';
    row += ',';
    if (r.rr_size_d) row += std::to_string(*r.rr_size_d);
    return row;
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records) {
    struct Acc {
        SummaryRow row;
        std::vector<double> costs;
        std::vector<double> times;
        std::size_t deviated = 0;
    };
    std::map<std::pair<std::size_t, int>, Acc> groups;
    for (const auto& r : records) {
        auto& g = groups[{r.num_flights, static_cast<int>(r.method)}];
        g.row.method = r.method;
        g.row.num_flights = r.num_flights;
        ++g.row.trials;
        g.times.push_back(r.solve_seconds);
        switch (r.status) {
            case TrialStatus::ok:
                ++g.row.ok;
                g.costs.push_back(*r.delay_cost);
                if (r.deviated) ++g.deviated;
                break;
            case TrialStatus::infeasible: ++g.row.infeasible; break;
            case TrialStatus::timeout: ++g.row.timeout; break;
            case TrialStatus::solver_failure: ++g.row.solver_failure; break;
        }
    }
    std::vector<SummaryRow> out;
    for (auto& [key, g] : groups) {
        auto& row = g.row;
        if (!g.costs.empty()) {
            double sum = 0.0;
            for (double c : g.costs) sum += c;
            row.mean_delay_cost = sum / static_cast<double>(g.costs.size());
            double ss = 0.0;
            for (double c : g.costs) ss += (c - row.mean_delay_cost) * (c - row.mean_delay_cost);
            row.std_delay_cost =
                g.costs.size() > 1 ? std::sqrt(ss / static_cast<double>(g.costs.size() - 1)) : 0.0;
            row.deviation_rate = static_cast<double>(g.deviated) / static_cast<double>(g.costs.size());
        } else {
            row.mean_delay_cost = std::numeric_limits<double>::quiet_NaN();
            row.std_delay_cost = std::numeric_limits<double>::quiet_NaN();
            row.deviation_rate = std::numeric_limits<double>::quiet_NaN();
        }
        double tsum = 0.0;
        for (double t : g.times) tsum += t;
        row.mean_solve_seconds = tsum / static_cast<double>(g.times.size());
        std::sort(g.times.begin(), g.times.end());
        const std::size_t n = g.times.size();
        row.median_solve_seconds =
            n % 2 ? g.times[n / 2] : 0.5 * (g.times[n / 2 - 1] + g.times[n / 2]);
        out.push_back(row);
    }
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* csv) {
    config.validate();
    struct Unit {
        std::size_t num_flights;
        std::size_t trial;
    };
    std::vector<Unit> units;
    for (std::size_t f : config.flight_counts)
        for (std::size_t t = 0; t < config.num_trials; ++t) units.push_back({f, t});

    std::vector<std::optional<std::vector<TrialRecord>>> done(units.size());
    std::size_t next_to_write = 0;
    std::mutex mu;
    std::atomic<std::size_t> next_unit{0};

    auto emit_ready = [&] {
        // Caller holds mu.
        while (next_to_write < done.size() && done[next_to_write]) {
            if (csv) {
                for (const auto& r : *done[next_to_write]) *csv << csv_row(r) << '\n';
                csv->flush();
                if (!*csv) throw std::runtime_error("failed writing CSV output");
            }
            ++next_to_write;
        }
    };

    if (csv) {
        *csv << kCsvHeader << '\n';
        csv->flush();
    }

    std::exception_ptr error;
    auto worker = [&] {
        for (;;) {
            const std::size_t k = next_unit.fetch_add(1);
            if (k >= units.size()) return;
            try {
                auto records = run_cell(config, units[k].trial, units[k].num_flights);
                std::lock_guard lock(mu);
                done[k] = std::move(records);
                emit_ready();
            } catch (...) {
                std::lock_guard lock(mu);
                if (!error) error = std::current_exception();
                next_unit = units.size();
                return;
            }
        }
    };

    const std::size_t threads = std::min(resolve_threads(config.threads), std::max<std::size_t>(1, units.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    ExperimentResult result;
    for (auto& cell : done)
        for (auto& r : *cell) result.records.push_back(std::move(r));
    result.summary = summarize(result.records);
    return result;
}

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-11s %7s %6s %4s %5s %5s %5s %12s %10s %12s %9s\n", "method",
                  "flights", "trials", "ok", "infea", "tmout", "fail", "mean_cost", "std_cost",
                  "mean_solve_s", "dev_rate");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-11s %7zu %6zu %4zu %5zu %5zu %5zu %12.3f %10.3f %12.6f %9.3f\n",
                      to_string(r.method), r.num_flights, r.trials, r.ok, r.infeasible, r.timeout,
                      r.solver_failure, r.mean_delay_cost, r.std_delay_cost, r.mean_solve_seconds,
                      r.deviation_rate);
        out << line;
    }
}

}  // namespace ccce::harness
