#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ccce/game.hpp"
#include "ccce/uncertainty.hpp"

namespace ccce::vq {

enum class AircraftClass { small, medium, heavy };

const char* to_string(AircraftClass c);
AircraftClass parse_aircraft_class(std::string_view name);

struct Flight {
    std::size_t id = 0;
    std::size_t runway = 0;
    AircraftClass aircraft_class = AircraftClass::medium;
    double lateness = 0.0;  // minutes, >= 0
};

struct ClassWeights {
    double heavy = 1.2;
    double medium = 1.0;
    double small = 0.75;

    double of(AircraftClass c) const;
};

/// Delay charged to a flight its airline does not release this epoch.
enum class HoldModel {
    /// Waits one epoch at the gate: epoch_minutes.
    gate_wait,
    /// Waits one epoch, then joins its runway queue behind whatever the
    /// runway could not serve: epoch_minutes * (1 + (max(0, q~_r - mu_r) + 1) / mu_r).
    requeue,
    /// Departs one epoch later: lateness grows by epoch_minutes and the
    /// flight then waits behind the runway backlog, (max(0, q~_r - mu_r) + 1) / mu_r
    /// epochs.
    deferred,
};

const char* to_string(HoldModel m);
HoldModel parse_hold_model(std::string_view name);

struct VqParams {
    std::vector<double> service_rates{2.0, 2.0};  // aircraft per epoch, one per runway
    std::vector<int> initial_queues{3, 4};        // aircraft, one per runway
    double epoch_minutes = 4.0;
    int congestion_threshold = 4;
    double lateness_threshold = 10.0;
    double lateness_sigma = 10.0;
    ClassWeights weights{};
    HoldModel hold = HoldModel::deferred;
    std::size_t max_airline_flights = 20;
    std::size_t max_joint_actions = std::size_t{1} << 24;

    std::size_t num_runways() const { return service_rates.size(); }
    void validate() const;
};

struct VqInstance {
    VqParams params;
    std::vector<Flight> flights;                    // flights[k].id == k
    std::vector<std::vector<std::size_t>> airlines; // owned flight ids, ascending

    std::size_t num_flights() const { return flights.size(); }
    std::size_t num_airlines() const { return airlines.size(); }
    void validate() const;
};

/// Released flags indexed by flight id.
using Release = std::vector<bool>;

/// Truncated N(0, sigma^2) on [0, inf) by resampling.
double sample_lateness(double sigma, Rng& rng);

/// Random instance: lateness ~ N(0, sigma^2) truncated at 0, uniform runway,
/// class and airline; airlines left empty get a flight from the largest one.
VqInstance generate_instance(std::size_t num_flights, std::size_t num_airlines,
                             std::uint64_t seed, const VqParams& params = {});

/// Subsets of the airline's flights, binary counting over ascending ids with
/// the lowest id as bit 0; the empty set comes first.
std::vector<std::vector<std::size_t>> action_space(const VqInstance& inst, std::size_t airline);

/// Flights released by a joint action given as per-airline subset indices.
Release release_of(const VqInstance& inst, std::span<const std::size_t> profile);

std::vector<int> pushback_counts(const VqInstance& inst, const Release& release);

/// (q_r + a_r) / mu_r * epoch_minutes for the flight's runway.
double queue_delay(const VqInstance& inst, const std::vector<int>& counts, std::size_t flight);

/// Queue-side delay of an unreleased flight under params.hold.
double hold_delay(const VqInstance& inst, const std::vector<int>& counts, std::size_t flight);

/// Schedule lateness the flight is charged with: lateness, plus one epoch
/// for an unreleased flight under HoldModel::deferred.
double effective_lateness(const VqInstance& inst, const Release& release, std::size_t flight);

/// max(0, released - threshold)^2
double congestion_penalty(std::size_t released, int threshold = 4);
double congestion_penalty(const VqInstance& inst, const Release& release);

double flight_delay_cost(const VqInstance& inst, const Release& release, std::size_t flight);

/// Per-flight delay cost from its components: quadratic lateness above the
/// threshold, linear otherwise.
double flight_delay_cost(double lateness, double delay, double congestion,
                         double lateness_threshold = 10.0);

double airline_cost(const VqInstance& inst, const Release& release, std::size_t airline);
double system_cost(const VqInstance& inst, const Release& release);

struct VqGame {
    FiniteGame game;
    std::vector<double> sys_cost;
};

/// Game with X_i = action_space(i), J_i = airline_cost and a J_sys table.
/// Throws BudgetExceeded past max_airline_flights or max_joint_actions.
VqGame build_game(const VqInstance& inst);

/// Release-all profile.
Profile fcfs_profile(const VqInstance& inst);

VqParams params_from_json(std::string_view text);
std::string params_to_json(const VqParams& params);
std::string instance_to_json(const VqInstance& inst);
VqInstance instance_from_json(std::string_view text);

}  // namespace ccce::vq
