#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ccce {

/// Flat (mixed-radix) index of a joint action.
using JointIndex = std::size_t;

/// Per-agent action coordinates of a joint action; coords[i] < |X_i|.
using Profile = std::vector<std::size_t>;

/// A joint space or action set exceeded a configured enumeration cap.
class BudgetExceeded : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Mixed-radix encoding of the joint action space. Agent 0 is the most
/// significant digit.
class JointSpace {
public:
    JointSpace() = default;
    explicit JointSpace(std::vector<std::size_t> action_counts);

    std::size_t num_agents() const { return counts_.size(); }
    std::size_t size() const { return size_; }
    std::size_t count(std::size_t agent) const { return counts_.at(agent); }
    std::size_t stride(std::size_t agent) const { return strides_.at(agent); }
    const std::vector<std::size_t>& counts() const { return counts_; }

    JointIndex flat_index(std::span<const std::size_t> coords) const;
    Profile unflatten(JointIndex flat) const;

    /// Coordinate of `agent` inside `flat`.
    std::size_t coord(JointIndex flat, std::size_t agent) const {
        return (flat / strides_[agent]) % counts_[agent];
    }

    /// `flat` with agent's coordinate replaced by `action`.
    JointIndex with_action(JointIndex flat, std::size_t agent,
                           std::size_t action) const {
        const std::size_t current = coord(flat, agent);
        return flat - current * strides_[agent] + action * strides_[agent];
    }

    /// Calls f(flat) for every joint action in which `agent` plays `action`,
    /// in ascending flat order.
    template <class F>
    void for_each_with(std::size_t agent, std::size_t action, F&& f) const {
        const std::size_t inner = strides_[agent];
        const std::size_t block = inner * counts_[agent];
        for (std::size_t outer = 0; outer < size_; outer += block) {
            const std::size_t base = outer + action * inner;
            for (std::size_t k = 0; k < inner; ++k) f(base + k);
        }
    }

private:
    std::vector<std::size_t> counts_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

JointIndex flat_index(std::span<const std::size_t> coords,
                      std::span<const std::size_t> action_counts);
Profile unflatten(JointIndex flat, std::span<const std::size_t> action_counts);

/// Finite normal-form game in cost (minimization) convention. Costs are stored
/// densely, one table per agent, indexed by flat joint index.
class FiniteGame {
public:
    FiniteGame(std::vector<std::size_t> action_counts,
               std::vector<std::vector<double>> costs,
               std::vector<std::vector<std::string>> labels = {});

    std::size_t num_agents() const { return space_.num_agents(); }
    std::size_t num_actions(std::size_t agent) const { return space_.count(agent); }
    std::size_t joint_size() const { return space_.size(); }
    const JointSpace& space() const { return space_; }
    const std::vector<std::size_t>& action_counts() const { return space_.counts(); }

    double cost(std::size_t agent, JointIndex flat) const { return costs_[agent][flat]; }
    std::span<const double> costs(std::size_t agent) const { return costs_.at(agent); }
    const std::vector<std::vector<std::string>>& labels() const { return labels_; }

    /// J_i(from, x_-i) - J_i(to, x_-i). Agent i's own coordinate in `profile`
    /// is ignored.
    double deviation_cost(std::size_t agent, std::size_t from, std::size_t to,
                          std::span<const std::size_t> profile) const;

    /// Same as above with x_-i taken from a flat index.
    double deviation_cost(std::size_t agent, std::size_t from, std::size_t to,
                          JointIndex others) const;

private:
    JointSpace space_;
    std::vector<std::vector<double>> costs_;
    std::vector<std::vector<std::string>> labels_;
};

/// Probability mass over the joint action space, stored densely.
class JointDistribution {
public:
    static constexpr double kSumTolerance = 1e-9;

    /// Validates nonnegativity and unit mass.
    explicit JointDistribution(std::vector<double> mass);

    static JointDistribution point_mass(std::size_t joint_size, JointIndex at);

    std::size_t size() const { return mass_.size(); }
    double operator[](JointIndex flat) const { return mass_[flat]; }
    std::span<const double> mass() const { return mass_; }

    /// Indices with positive mass, ascending.
    std::vector<JointIndex> support() const;

private:
    std::vector<double> mass_;
};

/// Sum over x_-i of z(rec, x_-i) * DeltaJ_i(rec, alt, x_-i). This is the
/// linear form used in the equilibrium programs.
double weighted_deviation(const FiniteGame& game, const JointDistribution& z,
                          std::size_t agent, std::size_t rec, std::size_t alt);

/// Marginal probability that agent plays `action` under z.
double marginal(const FiniteGame& game, const JointDistribution& z,
                std::size_t agent, std::size_t action);

/// E_{x_-i ~ z(.|rec)}[DeltaJ_i(rec, alt, x_-i)]; 0 when the marginal of rec
/// is zero.
double conditional_expected_deviation(const FiniteGame& game,
                                      const JointDistribution& z,
                                      std::size_t agent, std::size_t rec,
                                      std::size_t alt);

// JSON: {"agents": n, "action_counts": [...], "costs": [[...], ...],
//        "labels": [[...], ...]}   ("labels" optional)
FiniteGame parse_game_json(std::string_view text);
std::string game_to_json(const FiniteGame& game);

}  // namespace ccce
