#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <vector>

#include "ccce/game.hpp"
#include "ccce/lp.hpp"
#include "ccce/uncertainty.hpp"

namespace ccce {

/// Confidence level alpha in (0,1).
class Confidence {
public:
    explicit Confidence(double alpha);
    double alpha() const { return alpha_; }

private:
    double alpha_;
};

/// One incentive constraint c = (agent, recommended, alternative).
struct DeviationConstraintId {
    std::size_t agent = 0;
    std::size_t recommended = 0;
    std::size_t alternative = 0;

    auto operator<=>(const DeviationConstraintId&) const = default;
};

using Tightening = std::map<DeviationConstraintId, double>;

/// All constraint ids, ordered by (agent, recommended, alternative).
/// Count = sum_i |X_i| (|X_i| - 1).
std::vector<DeviationConstraintId> deviation_constraints(const FiniteGame& game);

/// Tightening t_c = Phi^-1_{i(c)}(alpha) for every constraint.
Tightening quantile_tightening(const FiniteGame& game, const UncertaintyModel& unc,
                               const Confidence& conf);

/// LP over z (one variable per joint action, z >= 0) with one row per
/// constraint c:
///     sum_{x_-i} z(x_i, x_-i) * (DeltaJ_i(x_i, x_i', x_-i) + t_c) <= 0
/// and sum z = 1. The objective is left at zero. Throws invalid_argument when
/// a constraint id has no tightening entry.
lp::LinearProgram assemble_ce_constraints(const FiniteGame& game, const Tightening& tightening);

enum class SolveStatus { optimal, infeasible };

struct CeSolution {
    SolveStatus status = SolveStatus::infeasible;
    std::optional<JointDistribution> distribution;
    double objective = 0.0;
    std::size_t lp_iterations = 0;

    bool ok() const { return status == SolveStatus::optimal; }
};

/// min_z sum_x z(x) J_sys(x) over the nominal CE polytope.
CeSolution solve_ce(const FiniteGame& game, const std::vector<double>& sys_cost,
                    const lp::SolveOptions& options = {});

/// min_z sum_x z(x) J_sys(x) over the CC-CE polytope at confidence `conf`.
/// LP failures (lp::SolverFailure, lp::SolveTimeout) propagate.
CeSolution solve_full_ccce(const FiniteGame& game, const UncertaintyModel& unc,
                           const Confidence& conf, const std::vector<double>& sys_cost,
                           const lp::SolveOptions& options = {});

struct FeasibilityReport {
    bool feasible = false;
    /// Max over constraints with positive marginal of
    /// E[DeltaJ | rec] + Phi^-1(alpha). -infinity if no such constraint exists.
    double worst_margin = 0.0;
    std::optional<DeviationConstraintId> worst;
};

inline constexpr double kFeasibilityTolerance = 1e-7;

/// Replays every tightened constraint in weighted form; feasible iff each is
/// at most kFeasibilityTolerance.
FeasibilityReport check_ccce_feasibility(const FiniteGame& game, const JointDistribution& z,
                                         const UncertaintyModel& unc, const Confidence& conf);

/// Nominal CE check (zero tightening).
FeasibilityReport check_ce_feasibility(const FiniteGame& game, const JointDistribution& z);

/// Pure profile x is a CC-PNE iff DeltaJ_i(x_i, x_i', x_-i) + Phi^-1_i(alpha) <= 0
/// for every agent and every alternative.
bool is_cc_pne(const FiniteGame& game, JointIndex profile, const UncertaintyModel& unc,
               const Confidence& conf);
bool is_cc_pne(const FiniteGame& game, const Profile& profile, const UncertaintyModel& unc,
               const Confidence& conf);

struct CcPneSet {
    std::vector<JointIndex> profiles;  // ascending flat order
    double alpha_used = 0.5;
    bool truncated = false;

    std::size_t size() const { return profiles.size(); }
    bool empty() const { return profiles.empty(); }
};

inline constexpr std::size_t kDefaultEnumerationCap = std::size_t{1} << 24;

struct EnumerationOptions {
    std::optional<std::size_t> limit;
    std::size_t cap = kDefaultEnumerationCap;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

/// Exhaustive scan of pure profiles in ascending flat order, keeping the first
/// `limit` CC-PNEs. Throws BudgetExceeded when the joint space exceeds `cap`,
/// lp::SolveTimeout when the deadline passes.
CcPneSet enumerate_cc_pne(const FiniteGame& game, const UncertaintyModel& unc,
                          const Confidence& conf, const EnumerationOptions& options = {});

struct RrSolution {
    SolveStatus status = SolveStatus::infeasible;
    std::vector<double> weights;  // lambda, one per profile in the set
    std::optional<JointDistribution> induced;
    double objective = 0.0;

    bool ok() const { return status == SolveStatus::optimal; }
};

/// min over the d-simplex of sum_k lambda_k J_sys(x^(k)). Closed form: all
/// mass on the cheapest profile, ties to the lowest position. An empty set is
/// reported as infeasible.
RrSolution solve_reduced_rank(const FiniteGame& game, const CcPneSet& pne_set,
                              const std::vector<double>& sys_cost);

/// Same program solved with the simplex engine.
RrSolution solve_reduced_rank_lp(const FiniteGame& game, const CcPneSet& pne_set,
                                 const std::vector<double>& sys_cost);

/// Mixture sum_k lambda_k * 1{x = x^(k)}.
JointDistribution mixture(const FiniteGame& game, const std::vector<JointIndex>& profiles,
                          const std::vector<double>& weights);

/// Draws x with probability z(x).
JointIndex sample_recommendation(const JointDistribution& z, Rng& rng);

}  // namespace ccce
