#pragma once

#include <random>
#include <vector>

#include "ccce/game.hpp"
#include "oracles.hpp"

namespace testing {

// Two drivers at an intersection, actions {G=0, S=1}:
// (G,G)=(5,5), (G,S)=(-1,1), (S,G)=(1,-1), (S,S)=(1,1).
inline ccce::FiniteGame intersection_game() {
    return ccce::FiniteGame({2, 2}, {{5, -1, 1, 1}, {5, 1, -1, 1}}, {{"G", "S"}, {"G", "S"}});
}

inline std::vector<double> social_cost(const ccce::FiniteGame& g) {
    std::vector<double> s(g.joint_size(), 0.0);
    for (std::size_t i = 0; i < g.num_agents(); ++i)
        for (std::size_t x = 0; x < g.joint_size(); ++x) s[x] += g.cost(i, x);
    return s;
}

/// Random game with integer costs in [lo, hi].
inline ccce::FiniteGame random_game(std::mt19937_64& rng, std::vector<std::size_t> counts,
                                    int lo, int hi) {
    std::size_t size = 1;
    for (auto c : counts) size *= c;
    std::uniform_int_distribution<int> cost(lo, hi);
    std::vector<std::vector<double>> costs(counts.size(), std::vector<double>(size));
    for (auto& table : costs)
        for (auto& v : table) v = cost(rng);
    return ccce::FiniteGame(std::move(counts), std::move(costs));
}

inline ccce::FiniteGame random_small_game(std::mt19937_64& rng) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
    std::vector<std::size_t> counts(n);
    for (auto& c : counts) c = std::uniform_int_distribution<std::size_t>(2, 3)(rng);
    return random_game(rng, counts, -5, 5);
}

inline oracle::Game to_oracle(const ccce::FiniteGame& g) {
    oracle::Game o;
    o.counts = g.action_counts();
    for (std::size_t i = 0; i < g.num_agents(); ++i) {
        auto c = g.costs(i);
        o.cost.emplace_back(c.begin(), c.end());
    }
    return o;
}

/// Uniform point on the simplex of the given dimension.
inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t d) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(d);
    double s = 0.0;
    for (auto& v : w) s += (v = e(rng));
    for (auto& v : w) v /= s;
    return w;
}

}  // namespace testing
