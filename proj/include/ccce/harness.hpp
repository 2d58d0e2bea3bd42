#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ccce/equilibrium.hpp"
#include "ccce/game.hpp"
#include "ccce/uncertainty.hpp"
#include "ccce/vq.hpp"

namespace ccce::harness {

enum class Method { fcfs, full_ccce, rr_nominal, rr_ccce };

const char* to_string(Method m);
Method parse_method(std::string_view name);
std::vector<Method> parse_methods(std::string_view list);  // comma separated

/// "6..14", "6,8,10" or "9".
std::vector<std::size_t> parse_flight_counts(std::string_view text);

struct ExperimentConfig {
    std::vector<Method> methods{Method::fcfs, Method::full_ccce, Method::rr_nominal,
                                Method::rr_ccce};
    std::size_t num_trials = 100;
    std::vector<std::size_t> flight_counts{6, 7, 8, 9, 10, 11, 12, 13, 14};
    std::size_t num_airlines = 5;
    double alpha = 0.9;
    /// One value for every airline, or one per airline.
    std::vector<double> sigma{0.0};
    std::uint64_t master_seed = 0;
    double time_budget_seconds = 240.0;
    std::optional<std::size_t> pne_limit;
    vq::VqParams scenario{};
    /// Worker threads; 0 reads CCCE_THREADS (default 1).
    std::size_t threads = 0;

    void validate() const;
    /// True perturbation model for `num_airlines` airlines.
    UncertaintyModel uncertainty() const;
    /// sigma as written to the CSV: "2" or "1;2;3".
    std::string sigma_label() const;
};

/// Parses the JSON config file format documented in the README.
ExperimentConfig config_from_json(std::string_view text);

enum class TrialStatus { ok, infeasible, timeout, solver_failure };
const char* to_string(TrialStatus s);

struct TrialRecord {
    std::size_t trial_index = 0;
    Method method = Method::fcfs;
    std::size_t num_flights = 0;
    double alpha = 0.0;
    std::string sigma;
    TrialStatus status = TrialStatus::ok;
    double solve_seconds = 0.0;
    std::optional<double> delay_cost;  // present iff status == ok
    bool deviated = false;
    std::optional<std::size_t> rr_size_d;

    // Diagnostics; not part of the CSV.
    std::optional<double> planned_objective;
    std::optional<JointIndex> recommendation;
    std::optional<JointIndex> final_action;
    std::string message;
};

struct DeviationOutcome {
    JointIndex final_action = 0;
    bool deviated = false;
};

/// Simultaneous deviation against the coordinator's distribution. Agent i's
/// margin for alternative a is E_z[DeltaJ_i(rec_i, a, .) | rec_i] + eta_i; an
/// agent with a positive maximum margin switches to the argmax (lowest index
/// on ties), all others follow their recommendation.
DeviationOutcome simulate_deviation(const FiniteGame& game, const JointDistribution& z,
                                    JointIndex recommendation, const std::vector<double>& eta);

/// As above, drawing one eta_i per agent from `rng` in agent order.
DeviationOutcome simulate_deviation(const FiniteGame& game, const JointDistribution& z,
                                    JointIndex recommendation, const UncertaintyModel& unc,
                                    Rng& rng);

/// Substream seeds. Instances depend only on (master, trial, num_flights).
std::uint64_t instance_seed(const ExperimentConfig& config, std::size_t trial,
                            std::size_t num_flights);
std::uint64_t recommendation_seed(const ExperimentConfig& config, std::size_t trial,
                                  std::size_t num_flights);
std::uint64_t perturbation_seed(const ExperimentConfig& config, std::size_t trial,
                                std::size_t num_flights, std::size_t agent);

/// One eta per airline, each from its own substream.
std::vector<double> draw_perturbations(const ExperimentConfig& config, std::size_t trial,
                                       std::size_t num_flights);

/// Generates the trial's instance.
vq::VqInstance trial_instance(const ExperimentConfig& config, std::size_t trial,
                              std::size_t num_flights);

/// Full pipeline for one (trial, flight count, method) cell. Never throws for
/// solver-side problems; they are reported through status.
TrialRecord run_trial(const ExperimentConfig& config, std::size_t trial_index,
                      std::size_t num_flights, Method method);

/// Same pipeline on a prebuilt game; used to share one instance across methods.
TrialRecord run_trial_on(const ExperimentConfig& config, const vq::VqInstance& inst,
                         const vq::VqGame& built, std::size_t trial_index, Method method);

struct SummaryRow {
    Method method = Method::fcfs;
    std::size_t num_flights = 0;
    std::size_t trials = 0;
    std::size_t ok = 0;
    std::size_t infeasible = 0;
    std::size_t timeout = 0;
    std::size_t solver_failure = 0;
    double mean_delay_cost = 0.0;  // over ok trials
    double std_delay_cost = 0.0;
    double mean_solve_seconds = 0.0;    // over all trials
    double median_solve_seconds = 0.0;  // over all trials
    double deviation_rate = 0.0;        // deviated / ok; NaN when ok == 0
};

std::vector<SummaryRow> summarize(const std::vector<TrialRecord>& records);

inline constexpr std::string_view kCsvHeader =
    "trial,method,num_flights,alpha,sigma,status,solve_seconds,delay_cost,deviated,rr_size_d";

std::string csv_row(const TrialRecord& r);

struct ExperimentResult {
    std::vector<TrialRecord> records;  // in CSV order
    std::vector<SummaryRow> summary;
};

/// Runs every (flight count, trial, method) cell; rows go to `csv` (if given)
/// in deterministic order, flushed per row.
ExperimentResult run_experiment(const ExperimentConfig& config, std::ostream* csv = nullptr);

void print_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace ccce::harness
