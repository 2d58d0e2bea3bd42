#include "ccce/game.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace ccce {

JointSpace::JointSpace(std::vector<std::size_t> action_counts)
    : counts_(std::move(action_counts)), strides_(counts_.size()) {
    if (counts_.empty()) throw std::invalid_argument("game needs at least one agent");
    std::size_t stride = 1;
    for (std::size_t i = counts_.size(); i-- > 0;) {
        if (counts_[i] == 0) throw std::invalid_argument("every agent needs at least one action");
        strides_[i] = stride;
        if (stride > std::numeric_limits<std::size_t>::max() / counts_[i])
            throw std::invalid_argument("joint action space overflows");
        stride *= counts_[i];
    }
    size_ = stride;
}

JointIndex JointSpace::flat_index(std::span<const std::size_t> coords) const {
    if (coords.size() != counts_.size())
        throw std::invalid_argument("profile length does not match agent count");
    JointIndex flat = 0;
    for (std::size_t i = 0; i < coords.size(); ++i) {
        if (coords[i] >= counts_[i])
            throw std::invalid_argument("action coordinate out of range for agent " +
                                        std::to_string(i));
        flat += coords[i] * strides_[i];
    }
    return flat;
}

Profile JointSpace::unflatten(JointIndex flat) const {
    if (flat >= size_) throw std::invalid_argument("flat index out of range");
    Profile coords(counts_.size());
    for (std::size_t i = 0; i < counts_.size(); ++i) coords[i] = coord(flat, i);
    return coords;
}

JointIndex flat_index(std::span<const std::size_t> coords,
                      std::span<const std::size_t> action_counts) {
    return JointSpace({action_counts.begin(), action_counts.end()}).flat_index(coords);
}

Profile unflatten(JointIndex flat, std::span<const std::size_t> action_counts) {
    return JointSpace({action_counts.begin(), action_counts.end()}).unflatten(flat);
}

FiniteGame::FiniteGame(std::vector<std::size_t> action_counts,
                       std::vector<std::vector<double>> costs,
                       std::vector<std::vector<std::string>> labels)
    : space_(std::move(action_counts)), costs_(std::move(costs)), labels_(std::move(labels)) {
    if (costs_.size() != space_.num_agents())
        throw std::invalid_argument("need one cost table per agent");
    for (const auto& table : costs_) {
        if (table.size() != space_.size())
            throw std::invalid_argument("cost table size must equal the joint space size");
        for (double c : table)
            if (!std::isfinite(c)) throw std::invalid_argument("costs must be finite");
    }
    if (!labels_.empty()) {
        if (labels_.size() != space_.num_agents())
            throw std::invalid_argument("labels must be given for every agent");
        for (std::size_t i = 0; i < labels_.size(); ++i)
            if (labels_[i].size() != space_.count(i))
                throw std::invalid_argument("label count mismatch for agent " + std::to_string(i));
    }
}

double FiniteGame::deviation_cost(std::size_t agent, std::size_t from, std::size_t to,
                                  std::span<const std::size_t> profile) const {
    if (agent >= num_agents()) throw std::invalid_argument("agent out of range");
    Profile p(profile.begin(), profile.end());
    if (p.size() != num_agents()) throw std::invalid_argument("profile length mismatch");
    p[agent] = 0;
    return deviation_cost(agent, from, to, space_.flat_index(p));
}

double FiniteGame::deviation_cost(std::size_t agent, std::size_t from, std::size_t to,
                                  JointIndex others) const {
    if (agent >= num_agents()) throw std::invalid_argument("agent out of range");
    if (from >= num_actions(agent) || to >= num_actions(agent))
        throw std::invalid_argument("action out of range");
    if (from == to) throw std::invalid_argument("deviation needs two distinct actions");
    if (others >= joint_size()) throw std::invalid_argument("flat index out of range");
    return costs_[agent][space_.with_action(others, agent, from)] -
           costs_[agent][space_.with_action(others, agent, to)];
}

JointDistribution::JointDistribution(std::vector<double> mass) : mass_(std::move(mass)) {
    if (mass_.empty()) throw std::invalid_argument("distribution must be nonempty");
    double total = 0.0;
    for (double m : mass_) {
        if (!(m >= 0.0) || !std::isfinite(m))
            throw std::invalid_argument("probability masses must be finite and nonnegative");
        total += m;
    }
    if (std::abs(total - 1.0) > kSumTolerance)
        throw std::invalid_argument("probability masses must sum to one");
}

JointDistribution JointDistribution::point_mass(std::size_t joint_size, JointIndex at) {
    if (at >= joint_size) throw std::invalid_argument("point mass index out of range");
    std::vector<double> mass(joint_size, 0.0);
    mass[at] = 1.0;
    return JointDistribution(std::move(mass));
}

std::vector<JointIndex> JointDistribution::support() const {
    std::vector<JointIndex> out;
    for (JointIndex x = 0; x < mass_.size(); ++x)
        if (mass_[x] > 0.0) out.push_back(x);
    return out;
}

namespace {

void check_pair(const FiniteGame& game, const JointDistribution& z, std::size_t agent,
                std::size_t rec, std::size_t alt) {
    if (z.size() != game.joint_size())
        throw std::invalid_argument("distribution does not match the game");
    if (agent >= game.num_agents()) throw std::invalid_argument("agent out of range");
    if (rec >= game.num_actions(agent) || alt >= game.num_actions(agent))
        throw std::invalid_argument("action out of range");
}

}  // namespace

double weighted_deviation(const FiniteGame& game, const JointDistribution& z,
                          std::size_t agent, std::size_t rec, std::size_t alt) {
    check_pair(game, z, agent, rec, alt);
    if (rec == alt) return 0.0;
    const auto& space = game.space();
    const auto costs = game.costs(agent);
    const std::ptrdiff_t shift = (static_cast<std::ptrdiff_t>(alt) - static_cast<std::ptrdiff_t>(rec)) *
                                 static_cast<std::ptrdiff_t>(space.stride(agent));
    double sum = 0.0;
    space.for_each_with(agent, rec, [&](JointIndex x) {
        const double p = z[x];
        if (p != 0.0) sum += p * (costs[x] - costs[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(x) + shift)]);
    });
    return sum;
}

double marginal(const FiniteGame& game, const JointDistribution& z, std::size_t agent,
                std::size_t action) {
    check_pair(game, z, agent, action, action);
    double sum = 0.0;
    game.space().for_each_with(agent, action, [&](JointIndex x) { sum += z[x]; });
    return sum;
}

double conditional_expected_deviation(const FiniteGame& game, const JointDistribution& z,
                                      std::size_t agent, std::size_t rec, std::size_t alt) {
    const double p = marginal(game, z, agent, rec);
    if (p <= 0.0) return 0.0;
    return weighted_deviation(game, z, agent, rec, alt) / p;
}

FiniteGame parse_game_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("game file is not valid JSON: ") + e.what());
    }
    try {
        auto counts = doc.at("action_counts").get<std::vector<std::size_t>>();
        if (doc.contains("agents") && doc.at("agents").get<std::size_t>() != counts.size())
            throw std::invalid_argument("\"agents\" does not match length of \"action_counts\"");
        auto costs = doc.at("costs").get<std::vector<std::vector<double>>>();
        std::vector<std::vector<std::string>> labels;
        if (doc.contains("labels") && !doc.at("labels").is_null())
            labels = doc.at("labels").get<std::vector<std::vector<std::string>>>();
        return FiniteGame(std::move(counts), std::move(costs), std::move(labels));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed game file: ") + e.what());
    }
}

std::string game_to_json(const FiniteGame& game) {
    nlohmann::json doc;
    doc["agents"] = game.num_agents();
    doc["action_counts"] = game.action_counts();
    auto& costs = doc["costs"] = nlohmann::json::array();
    for (std::size_t i = 0; i < game.num_agents(); ++i) {
        auto c = game.costs(i);
        costs.push_back(std::vector<double>(c.begin(), c.end()));
    }
    if (!game.labels().empty()) doc["labels"] = game.labels();
    return doc.dump();
}

}  // namespace ccce
