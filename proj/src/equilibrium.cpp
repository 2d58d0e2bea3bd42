#include "ccce/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ccce {

namespace {

// Absolute slack allowed in the pure-profile test, matching the equality
// tolerance used for costs.
constexpr double kPneTolerance = 1e-9;

// LP outputs below this are treated as exact zeros.
constexpr double kMassFloor = 1e-13;

void check_model(const FiniteGame& game, const UncertaintyModel& unc) {
    if (unc.size() != game.num_agents())
        throw std::invalid_argument("uncertainty model must have one entry per agent");
}

void check_sys_cost(const FiniteGame& game, const std::vector<double>& sys_cost) {
    if (sys_cost.size() != game.joint_size())
        throw std::invalid_argument("system cost must cover every joint action");
    for (double c : sys_cost)
        if (!std::isfinite(c)) throw std::invalid_argument("system cost must be finite");
}

JointDistribution clean_distribution(std::vector<double> values) {
    double total = 0.0;
    for (double& v : values) {
        if (v < kMassFloor) v = 0.0;
        total += v;
    }
    if (!(total > 0.0)) throw lp::SolverFailure("solver returned an empty distribution");
    for (double& v : values) v /= total;
    return JointDistribution(std::move(values));
}

CeSolution solve_polytope(const FiniteGame& game, const Tightening& tightening,
                          const std::vector<double>& sys_cost, const lp::SolveOptions& options) {
    check_sys_cost(game, sys_cost);
    auto program = assemble_ce_constraints(game, tightening);
    program.objective = sys_cost;
    const auto sol = lp::solve(program, options);
    CeSolution out;
    out.lp_iterations = sol.iterations;
    if (sol.status == lp::Status::infeasible) return out;
    if (sol.status == lp::Status::unbounded)
        throw lp::SolverFailure("equilibrium program reported unbounded over the simplex");
    out.distribution = clean_distribution(sol.values);
    out.status = SolveStatus::optimal;
    double f = 0.0;
    for (JointIndex x = 0; x < sys_cost.size(); ++x) f += (*out.distribution)[x] * sys_cost[x];
    out.objective = f;
    return out;
}

Tightening zero_tightening(const FiniteGame& game) {
    Tightening t;
    for (const auto& c : deviation_constraints(game)) t.emplace(c, 0.0);
    return t;
}

}  // namespace

Confidence::Confidence(double alpha) : alpha_(alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("confidence level must lie in (0,1)");
}

std::vector<DeviationConstraintId> deviation_constraints(const FiniteGame& game) {
    std::vector<DeviationConstraintId> out;
    for (std::size_t i = 0; i < game.num_agents(); ++i)
        for (std::size_t rec = 0; rec < game.num_actions(i); ++rec)
            for (std::size_t alt = 0; alt < game.num_actions(i); ++alt)
                if (alt != rec) out.push_back({i, rec, alt});
    return out;
}

Tightening quantile_tightening(const FiniteGame& game, const UncertaintyModel& unc,
                               const Confidence& conf) {
    check_model(game, unc);
    const auto q = unc.thresholds(conf.alpha());
    Tightening t;
    for (const auto& c : deviation_constraints(game)) t.emplace(c, q[c.agent]);
    return t;
}

lp::LinearProgram assemble_ce_constraints(const FiniteGame& game, const Tightening& tightening) {
    const std::size_t n = game.joint_size();
    const auto& space = game.space();
    lp::LinearProgram program(n);
    for (const auto& c : deviation_constraints(game)) {
        const auto it = tightening.find(c);
        if (it == tightening.end())
            throw std::invalid_argument("missing tightening for constraint (agent " +
                                        std::to_string(c.agent) + ", " +
                                        std::to_string(c.recommended) + " -> " +
                                        std::to_string(c.alternative) + ")");
        const double t = it->second;
        const auto costs = game.costs(c.agent);
        lp::Row row{std::vector<double>(n, 0.0), 0.0};
        space.for_each_with(c.agent, c.recommended, [&](JointIndex x) {
            const JointIndex dev = space.with_action(x, c.agent, c.alternative);
            row.coeffs[x] = costs[x] - costs[dev] + t;
        });
        program.ineq.push_back(std::move(row));
    }
    program.eq.push_back({std::vector<double>(n, 1.0), 1.0});
    return program;
}

CeSolution solve_ce(const FiniteGame& game, const std::vector<double>& sys_cost,
                    const lp::SolveOptions& options) {
    return solve_polytope(game, zero_tightening(game), sys_cost, options);
}

CeSolution solve_full_ccce(const FiniteGame& game, const UncertaintyModel& unc,
                           const Confidence& conf, const std::vector<double>& sys_cost,
                           const lp::SolveOptions& options) {
    return solve_polytope(game, quantile_tightening(game, unc, conf), sys_cost, options);
}

namespace {

FeasibilityReport check_with_thresholds(const FiniteGame& game, const JointDistribution& z,
                                        const std::vector<double>& thresholds) {
    if (z.size() != game.joint_size())
        throw std::invalid_argument("distribution does not match the game");
    FeasibilityReport report;
    report.feasible = true;
    report.worst_margin = -std::numeric_limits<double>::infinity();
    for (const auto& c : deviation_constraints(game)) {
        const double p = marginal(game, z, c.agent, c.recommended);
        if (p <= 0.0) continue;
        const double lhs = weighted_deviation(game, z, c.agent, c.recommended, c.alternative) +
                           thresholds[c.agent] * p;
        if (lhs > kFeasibilityTolerance) report.feasible = false;
        const double normalized = lhs / p;
        if (normalized > report.worst_margin) {
            report.worst_margin = normalized;
            report.worst = c;
        }
    }
    return report;
}

}  // namespace

FeasibilityReport check_ccce_feasibility(const FiniteGame& game, const JointDistribution& z,
                                         const UncertaintyModel& unc, const Confidence& conf) {
    check_model(game, unc);
    return check_with_thresholds(game, z, unc.thresholds(conf.alpha()));
}

FeasibilityReport check_ce_feasibility(const FiniteGame& game, const JointDistribution& z) {
    return check_with_thresholds(game, z, std::vector<double>(game.num_agents(), 0.0));
}

namespace {

bool passes(const FiniteGame& game, JointIndex x, const std::vector<double>& thresholds) {
    const auto& space = game.space();
    for (std::size_t i = 0; i < game.num_agents(); ++i) {
        const auto costs = game.costs(i);
        const double here = costs[x];
        const std::size_t own = space.coord(x, i);
        for (std::size_t alt = 0; alt < space.count(i); ++alt) {
            if (alt == own) continue;
            if (here - costs[space.with_action(x, i, alt)] + thresholds[i] > kPneTolerance)
                return false;
        }
    }
    return true;
}

}  // namespace

bool is_cc_pne(const FiniteGame& game, JointIndex profile, const UncertaintyModel& unc,
               const Confidence& conf) {
    check_model(game, unc);
    if (profile >= game.joint_size()) throw std::invalid_argument("profile out of range");
    return passes(game, profile, unc.thresholds(conf.alpha()));
}

bool is_cc_pne(const FiniteGame& game, const Profile& profile, const UncertaintyModel& unc,
               const Confidence& conf) {
    return is_cc_pne(game, game.space().flat_index(profile), unc, conf);
}

CcPneSet enumerate_cc_pne(const FiniteGame& game, const UncertaintyModel& unc,
                          const Confidence& conf, const EnumerationOptions& options) {
    check_model(game, unc);
    if (game.joint_size() > options.cap)
        throw BudgetExceeded("joint action space of " + std::to_string(game.joint_size()) +
                             " profiles exceeds the enumeration cap of " +
                             std::to_string(options.cap));
    const auto thresholds = unc.thresholds(conf.alpha());
    CcPneSet out;
    out.alpha_used = conf.alpha();
    for (JointIndex x = 0; x < game.joint_size(); ++x) {
        if (options.deadline && (x & 4095u) == 4095u &&
            std::chrono::steady_clock::now() > *options.deadline)
            throw lp::SolveTimeout("equilibrium enumeration exceeded its time budget");
        if (!passes(game, x, thresholds)) continue;
        if (options.limit && out.profiles.size() >= *options.limit) {
            out.truncated = true;
            break;
        }
        out.profiles.push_back(x);
    }
    return out;
}

JointDistribution mixture(const FiniteGame& game, const std::vector<JointIndex>& profiles,
                          const std::vector<double>& weights) {
    if (profiles.size() != weights.size())
        throw std::invalid_argument("one weight per profile required");
    std::vector<double> mass(game.joint_size(), 0.0);
    for (std::size_t k = 0; k < profiles.size(); ++k) {
        if (profiles[k] >= mass.size()) throw std::invalid_argument("profile out of range");
        mass[profiles[k]] += weights[k];
    }
    return JointDistribution(std::move(mass));
}

RrSolution solve_reduced_rank(const FiniteGame& game, const CcPneSet& pne_set,
                              const std::vector<double>& sys_cost) {
    check_sys_cost(game, sys_cost);
    RrSolution out;
    if (pne_set.empty()) return out;
    std::size_t best = 0;
    for (std::size_t k = 1; k < pne_set.size(); ++k)
        if (sys_cost[pne_set.profiles[k]] < sys_cost[pne_set.profiles[best]]) best = k;
    out.weights.assign(pne_set.size(), 0.0);
    out.weights[best] = 1.0;
    out.induced = mixture(game, pne_set.profiles, out.weights);
    out.objective = sys_cost[pne_set.profiles[best]];
    out.status = SolveStatus::optimal;
    return out;
}

RrSolution solve_reduced_rank_lp(const FiniteGame& game, const CcPneSet& pne_set,
                                 const std::vector<double>& sys_cost) {
    check_sys_cost(game, sys_cost);
    RrSolution out;
    if (pne_set.empty()) return out;
    const std::size_t d = pne_set.size();
    lp::LinearProgram program(d);
    for (std::size_t k = 0; k < d; ++k) program.objective[k] = sys_cost[pne_set.profiles[k]];
    program.eq.push_back({std::vector<double>(d, 1.0), 1.0});
    const auto sol = lp::solve(program);
    if (!sol.optimal()) throw lp::SolverFailure("reduced program has no optimum over the simplex");
    double total = 0.0;
    out.weights = sol.values;
    for (double& w : out.weights) {
        if (w < kMassFloor) w = 0.0;
        total += w;
    }
    for (double& w : out.weights) w /= total;
    out.induced = mixture(game, pne_set.profiles, out.weights);
    out.objective = 0.0;
    for (std::size_t k = 0; k < d; ++k) out.objective += out.weights[k] * program.objective[k];
    out.status = SolveStatus::optimal;
    return out;
}

JointIndex sample_recommendation(const JointDistribution& z, Rng& rng) {
    const auto mass = z.mass();
    std::discrete_distribution<JointIndex> pick(mass.begin(), mass.end());
    return pick(rng);
}

}  // namespace ccce
