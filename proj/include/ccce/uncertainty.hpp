#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ccce {

/// Engine used for every random stream. Output of mt19937_64 is fixed by the
/// standard; distribution objects layered on top are deterministic per build.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed of an independent substream, a pure function of its coordinates.
/// Used as derive_seed(master, trial, stream) so that results do not depend
/// on execution order.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(master);
    h = mix64(h ^ a);
    h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
    h = mix64(h ^ (c + 0x85157af5a2b1cb05ULL));
    return h;
}

/// Inverse CDF of the standard normal. Absolute error below 1e-8 on (0,1).
double standard_normal_quantile(double p);

/// CDF of the standard normal.
double standard_normal_cdf(double x);

enum class PerturbationKind { degenerate_zero, gaussian };

/// Distribution of the additive deviation-cost perturbation of one agent.
struct PerturbationDist {
    PerturbationKind kind = PerturbationKind::degenerate_zero;
    double sigma = 0.0;

    static PerturbationDist degenerate() { return {}; }
    static PerturbationDist gaussian(double sigma);

    double effective_sigma() const {
        return kind == PerturbationKind::gaussian ? sigma : 0.0;
    }
};

/// alpha-quantile of `dist`; alpha must lie in (0,1).
double quantile(const PerturbationDist& dist, double alpha);

/// One draw of the perturbation.
double sample(const PerturbationDist& dist, Rng& rng);

/// One perturbation distribution per agent.
struct UncertaintyModel {
    std::vector<PerturbationDist> per_agent;

    static UncertaintyModel nominal(std::size_t num_agents);
    static UncertaintyModel gaussian(std::size_t num_agents, double sigma);
    static UncertaintyModel gaussian(const std::vector<double>& sigmas);

    std::size_t size() const { return per_agent.size(); }

    /// Per-agent tightening Phi^-1_i(alpha).
    std::vector<double> thresholds(double alpha) const;
};

}  // namespace ccce
