#include "ccce/vq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace ccce::vq {

const char* to_string(AircraftClass c) {
    switch (c) {
        case AircraftClass::small: return "small";
        case AircraftClass::medium: return "medium";
        case AircraftClass::heavy: return "heavy";
    }
    return "medium";
}

AircraftClass parse_aircraft_class(std::string_view name) {
    if (name == "small") return AircraftClass::small;
    if (name == "medium") return AircraftClass::medium;
    if (name == "heavy") return AircraftClass::heavy;
    throw std::invalid_argument("unknown aircraft class: " + std::string(name));
}

double ClassWeights::of(AircraftClass c) const {
    switch (c) {
        case AircraftClass::small: return small;
        case AircraftClass::medium: return medium;
        case AircraftClass::heavy: return heavy;
    }
    return medium;
}

const char* to_string(HoldModel m) {
    switch (m) {
        case HoldModel::gate_wait: return "gate_wait";
        case HoldModel::requeue: return "requeue";
        case HoldModel::deferred: return "deferred";
    }
    return "deferred";
}

HoldModel parse_hold_model(std::string_view name) {
    if (name == "gate_wait") return HoldModel::gate_wait;
    if (name == "requeue") return HoldModel::requeue;
    if (name == "deferred") return HoldModel::deferred;
    throw std::invalid_argument("unknown hold model: " + std::string(name));
}

void VqParams::validate() const {
    if (service_rates.empty()) throw std::invalid_argument("need at least one runway");
    if (initial_queues.size() != service_rates.size())
        throw std::invalid_argument("initial_queues must have one entry per runway");
    for (double mu : service_rates)
        if (!(mu > 0.0) || !std::isfinite(mu))
            throw std::invalid_argument("service rates must be positive");
    for (int q : initial_queues)
        if (q < 0) throw std::invalid_argument("initial queues must be nonnegative");
    if (!(epoch_minutes > 0.0)) throw std::invalid_argument("epoch_minutes must be positive");
    if (congestion_threshold < 0)
        throw std::invalid_argument("congestion threshold must be nonnegative");
    if (!(lateness_threshold > 0.0))
        throw std::invalid_argument("lateness threshold must be positive");
    if (!(lateness_sigma >= 0.0)) throw std::invalid_argument("lateness sigma must be nonnegative");
    for (double w : {weights.heavy, weights.medium, weights.small})
        if (!(w >= 0.0)) throw std::invalid_argument("class weights must be nonnegative");
}

void VqInstance::validate() const {
    params.validate();
    std::vector<int> owners(flights.size(), 0);
    for (std::size_t k = 0; k < flights.size(); ++k) {
        if (flights[k].id != k) throw std::invalid_argument("flight ids must equal their position");
        if (flights[k].runway >= params.num_runways())
            throw std::invalid_argument("flight runway out of range");
        if (!(flights[k].lateness >= 0.0))
            throw std::invalid_argument("lateness must be nonnegative");
    }
    for (const auto& owned : airlines) {
        if (owned.empty()) throw std::invalid_argument("every airline must own a flight");
        if (!std::is_sorted(owned.begin(), owned.end()))
            throw std::invalid_argument("airline flights must be sorted by id");
        for (std::size_t f : owned) {
            if (f >= flights.size()) throw std::invalid_argument("airline owns unknown flight");
            ++owners[f];
        }
    }
    for (int c : owners)
        if (c != 1) throw std::invalid_argument("every flight must have exactly one airline");
}

double sample_lateness(double sigma, Rng& rng) {
    if (sigma == 0.0) return 0.0;
    std::normal_distribution<double> dist(0.0, sigma);
    for (;;) {
        const double l = dist(rng);
        if (l >= 0.0) return l;
    }
}

VqInstance generate_instance(std::size_t num_flights, std::size_t num_airlines,
                             std::uint64_t seed, const VqParams& params) {
    if (num_airlines == 0) throw std::invalid_argument("need at least one airline");
    if (num_airlines > num_flights)
        throw std::invalid_argument("cannot give " + std::to_string(num_airlines) +
                                    " airlines a flight each from " +
                                    std::to_string(num_flights) + " flights");
    params.validate();

    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick_runway(0, params.num_runways() - 1);
    std::uniform_int_distribution<int> pick_class(0, 2);
    std::uniform_int_distribution<std::size_t> pick_airline(0, num_airlines - 1);

    VqInstance inst;
    inst.params = params;
    inst.airlines.resize(num_airlines);
    std::vector<std::size_t> owner(num_flights);
    for (std::size_t k = 0; k < num_flights; ++k) {
        Flight f;
        f.id = k;
        f.lateness = sample_lateness(params.lateness_sigma, rng);
        f.runway = pick_runway(rng);
        f.aircraft_class = static_cast<AircraftClass>(pick_class(rng));
        owner[k] = pick_airline(rng);
        inst.flights.push_back(f);
        inst.airlines[owner[k]].push_back(k);
    }
    // Repair: each empty airline takes the highest-id flight of the largest
    // airline (lowest index on ties).
    for (std::size_t a = 0; a < num_airlines; ++a) {
        if (!inst.airlines[a].empty()) continue;
        std::size_t donor = 0;
        for (std::size_t b = 1; b < num_airlines; ++b)
            if (inst.airlines[b].size() > inst.airlines[donor].size()) donor = b;
        inst.airlines[a].push_back(inst.airlines[donor].back());
        inst.airlines[donor].pop_back();
    }
    for (auto& owned : inst.airlines) std::sort(owned.begin(), owned.end());
    return inst;
}

std::vector<std::vector<std::size_t>> action_space(const VqInstance& inst, std::size_t airline) {
    const auto& owned = inst.airlines.at(airline);
    if (owned.size() > inst.params.max_airline_flights || owned.size() >= 63)
        throw BudgetExceeded("airline " + std::to_string(airline) + " owns " +
                             std::to_string(owned.size()) + " flights, above the cap of " +
                             std::to_string(inst.params.max_airline_flights));
    const std::size_t count = std::size_t{1} << owned.size();
    std::vector<std::vector<std::size_t>> out(count);
    for (std::size_t s = 0; s < count; ++s)
        for (std::size_t j = 0; j < owned.size(); ++j)
            if (s >> j & 1u) out[s].push_back(owned[j]);
    return out;
}

Release release_of(const VqInstance& inst, std::span<const std::size_t> profile) {
    if (profile.size() != inst.num_airlines())
        throw std::invalid_argument("profile must have one action per airline");
    Release release(inst.num_flights(), false);
    for (std::size_t a = 0; a < profile.size(); ++a) {
        const auto& owned = inst.airlines[a];
        if (owned.size() < 64 && profile[a] >= (std::size_t{1} << owned.size()))
            throw std::invalid_argument("action out of range for airline " + std::to_string(a));
        for (std::size_t j = 0; j < owned.size(); ++j)
            if (profile[a] >> j & 1u) release[owned[j]] = true;
    }
    return release;
}

std::vector<int> pushback_counts(const VqInstance& inst, const Release& release) {
    std::vector<int> counts(inst.params.num_runways(), 0);
    for (std::size_t k = 0; k < inst.num_flights(); ++k)
        if (release[k]) ++counts[inst.flights[k].runway];
    return counts;
}

double queue_delay(const VqInstance& inst, const std::vector<int>& counts, std::size_t flight) {
    const std::size_t r = inst.flights.at(flight).runway;
    return (inst.params.initial_queues[r] + counts[r]) / inst.params.service_rates[r] *
           inst.params.epoch_minutes;
}

double hold_delay(const VqInstance& inst, const std::vector<int>& counts, std::size_t flight) {
    const auto& p = inst.params;
    if (p.hold == HoldModel::gate_wait) return p.epoch_minutes;
    const std::size_t r = inst.flights.at(flight).runway;
    const double backlog = std::max(0.0, p.initial_queues[r] + counts[r] - p.service_rates[r]);
    const double queue = (backlog + 1.0) / p.service_rates[r] * p.epoch_minutes;
    return p.hold == HoldModel::requeue ? p.epoch_minutes + queue : queue;
}

double effective_lateness(const VqInstance& inst, const Release& release, std::size_t flight) {
    const double l = inst.flights.at(flight).lateness;
    return !release.at(flight) && inst.params.hold == HoldModel::deferred
               ? l + inst.params.epoch_minutes
               : l;
}

double congestion_penalty(std::size_t released, int threshold) {
    const double excess = std::max(0.0, static_cast<double>(released) - threshold);
    return excess * excess;
}

double congestion_penalty(const VqInstance& inst, const Release& release) {
    return congestion_penalty(static_cast<std::size_t>(std::count(release.begin(), release.end(), true)),
                              inst.params.congestion_threshold);
}

double flight_delay_cost(double lateness, double delay, double congestion,
                         double lateness_threshold) {
    const double schedule = lateness > lateness_threshold ? lateness * lateness : lateness;
    return schedule + delay + congestion;
}

namespace {

// Per-flight costs for one release pattern; counts and congestion are shared.
struct Evaluation {
    std::vector<int> counts;
    double congestion;
};

Evaluation evaluate(const VqInstance& inst, const Release& release) {
    return {pushback_counts(inst, release), congestion_penalty(inst, release)};
}

double flight_cost(const VqInstance& inst, const Release& release, const Evaluation& e,
                   std::size_t k) {
    const double delay = release[k] ? queue_delay(inst, e.counts, k) : hold_delay(inst, e.counts, k);
    return flight_delay_cost(effective_lateness(inst, release, k), delay, e.congestion,
                             inst.params.lateness_threshold);
}

}  // namespace

double flight_delay_cost(const VqInstance& inst, const Release& release, std::size_t flight) {
    if (release.size() != inst.num_flights()) throw std::invalid_argument("release size mismatch");
    return flight_cost(inst, release, evaluate(inst, release), flight);
}

double airline_cost(const VqInstance& inst, const Release& release, std::size_t airline) {
    if (release.size() != inst.num_flights()) throw std::invalid_argument("release size mismatch");
    const auto e = evaluate(inst, release);
    double total = 0.0;
    for (std::size_t k : inst.airlines.at(airline))
        total += inst.params.weights.of(inst.flights[k].aircraft_class) * flight_cost(inst, release, e, k);
    return total;
}

double system_cost(const VqInstance& inst, const Release& release) {
    if (release.size() != inst.num_flights()) throw std::invalid_argument("release size mismatch");
    const auto e = evaluate(inst, release);
    double total = 0.0;
    for (std::size_t k = 0; k < inst.num_flights(); ++k) total += flight_cost(inst, release, e, k);
    return total;
}

VqGame build_game(const VqInstance& inst) {
    inst.validate();
    std::vector<std::size_t> counts;
    std::size_t joint = 1;
    for (std::size_t a = 0; a < inst.num_airlines(); ++a) {
        const std::size_t owned = inst.airlines[a].size();
        if (owned > inst.params.max_airline_flights || owned >= 63)
            throw BudgetExceeded("airline " + std::to_string(a) + " owns " + std::to_string(owned) +
                                 " flights, above the cap of " +
                                 std::to_string(inst.params.max_airline_flights));
        const std::size_t m = std::size_t{1} << owned;
        if (joint > inst.params.max_joint_actions / m)
            throw BudgetExceeded("joint action space exceeds the cap of " +
                                 std::to_string(inst.params.max_joint_actions));
        joint *= m;
        counts.push_back(m);
    }

    const JointSpace space(counts);
    const std::size_t n = inst.num_airlines();
    std::vector<std::vector<double>> costs(n, std::vector<double>(joint));
    std::vector<double> sys(joint);
    std::vector<double> per_flight(inst.num_flights());
    Profile profile(n);
    for (JointIndex x = 0; x < joint; ++x) {
        for (std::size_t a = 0; a < n; ++a) profile[a] = space.coord(x, a);
        const Release release = release_of(inst, profile);
        const auto e = evaluate(inst, release);
        double total = 0.0;
        for (std::size_t k = 0; k < inst.num_flights(); ++k) {
            per_flight[k] = flight_cost(inst, release, e, k);
            total += per_flight[k];
        }
        sys[x] = total;
        for (std::size_t a = 0; a < n; ++a) {
            double c = 0.0;
            for (std::size_t k : inst.airlines[a])
                c += inst.params.weights.of(inst.flights[k].aircraft_class) * per_flight[k];
            costs[a][x] = c;
        }
    }
    return {FiniteGame(std::move(counts), std::move(costs)), std::move(sys)};
}

Profile fcfs_profile(const VqInstance& inst) {
    Profile p(inst.num_airlines());
    for (std::size_t a = 0; a < p.size(); ++a) p[a] = (std::size_t{1} << inst.airlines[a].size()) - 1;
    return p;
}

namespace {

using nlohmann::json;

json params_json(const VqParams& p) {
    return json{
        {"runways", {{"count", p.num_runways()}, {"mu", p.service_rates}, {"q0", p.initial_queues}}},
        {"epoch_minutes", p.epoch_minutes},
        {"weights", {{"heavy", p.weights.heavy}, {"medium", p.weights.medium}, {"small", p.weights.small}}},
        {"thresholds", {{"congestion", p.congestion_threshold}, {"lateness", p.lateness_threshold}}},
        {"lateness_sigma", p.lateness_sigma},
        {"hold_model", to_string(p.hold)},
        {"max_airline_flights", p.max_airline_flights},
        {"max_joint_actions", p.max_joint_actions},
    };
}

VqParams params_of(const json& doc) {
    VqParams p;
    if (doc.contains("runways")) {
        const auto& r = doc.at("runways");
        if (r.contains("mu")) p.service_rates = r.at("mu").get<std::vector<double>>();
        if (r.contains("q0")) p.initial_queues = r.at("q0").get<std::vector<int>>();
        if (r.contains("count") && r.at("count").get<std::size_t>() != p.service_rates.size())
            throw std::invalid_argument("runways.count does not match runways.mu");
    }
    if (doc.contains("epoch_minutes")) p.epoch_minutes = doc.at("epoch_minutes").get<double>();
    if (doc.contains("weights")) {
        const auto& w = doc.at("weights");
        p.weights.heavy = w.value("heavy", p.weights.heavy);
        p.weights.medium = w.value("medium", p.weights.medium);
        p.weights.small = w.value("small", p.weights.small);
    }
    if (doc.contains("thresholds")) {
        const auto& t = doc.at("thresholds");
        p.congestion_threshold = t.value("congestion", p.congestion_threshold);
        p.lateness_threshold = t.value("lateness", p.lateness_threshold);
    }
    p.lateness_sigma = doc.value("lateness_sigma", p.lateness_sigma);
    if (doc.contains("hold_model"))
        p.hold = parse_hold_model(doc.at("hold_model").get<std::string>());
    p.max_airline_flights = doc.value("max_airline_flights", p.max_airline_flights);
    p.max_joint_actions = doc.value("max_joint_actions", p.max_joint_actions);
    p.validate();
    return p;
}

template <class F>
auto with_json_errors(F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed scenario JSON: ") + e.what());
    }
}

}  // namespace

VqParams params_from_json(std::string_view text) {
    return with_json_errors([&] { return params_of(json::parse(text)); });
}

std::string params_to_json(const VqParams& params) { return params_json(params).dump(); }

std::string instance_to_json(const VqInstance& inst) {
    json doc = params_json(inst.params);
    doc["num_flights"] = inst.num_flights();
    doc["num_airlines"] = inst.num_airlines();
    auto& flights = doc["flights"] = json::array();
    for (const auto& f : inst.flights)
        flights.push_back({{"id", f.id}, {"runway", f.runway},
                           {"class", to_string(f.aircraft_class)}, {"lateness", f.lateness}});
    doc["airlines"] = inst.airlines;
    return doc.dump();
}

VqInstance instance_from_json(std::string_view text) {
    return with_json_errors([&] {
        const json doc = json::parse(text);
        VqInstance inst;
        inst.params = params_of(doc);
        for (const auto& f : doc.at("flights"))
            inst.flights.push_back({f.at("id").get<std::size_t>(), f.at("runway").get<std::size_t>(),
                                    parse_aircraft_class(f.at("class").get<std::string>()),
                                    f.at("lateness").get<double>()});
        inst.airlines = doc.at("airlines").get<std::vector<std::vector<std::size_t>>>();
        inst.validate();
        return inst;
    });
}

}  // namespace ccce::vq
