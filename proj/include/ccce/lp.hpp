#pragma once

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccce::lp {

struct Row {
    std::vector<double> coeffs;
    double rhs = 0.0;
};

/// minimize objective . v  s.t.  ineq rows (row.v <= rhs), eq rows (row.v = rhs),
/// v >= lower_bounds (empty means all zero).
struct LinearProgram {
    std::size_t num_vars = 0;
    std::vector<double> objective;
    std::vector<Row> ineq;
    std::vector<Row> eq;
    std::vector<double> lower_bounds;

    explicit LinearProgram(std::size_t n = 0) : num_vars(n), objective(n, 0.0) {}

    std::size_t num_constraints() const { return ineq.size() + eq.size(); }
    void validate() const;
};

enum class Status { optimal, infeasible, unbounded };

const char* to_string(Status s);

struct Solution {
    Status status = Status::infeasible;
    std::vector<double> values;     // empty unless optimal
    double objective_value = 0.0;   // meaningful only when optimal
    std::size_t iterations = 0;

    bool optimal() const { return status == Status::optimal; }
};

/// Iteration cap exceeded, singular pivot, or problem too large for the dense
/// tableau.
class SolverFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The deadline in SolveOptions passed before an optimum was reached.
class SolveTimeout : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveOptions {
    std::optional<std::chrono::steady_clock::time_point> deadline;
    /// Upper bound on rows * columns of the dense tableau.
    std::size_t max_tableau_entries = std::size_t{1} << 26;
};

/// Dense two-phase primal simplex with Bland's rule. Deterministic for a fixed
/// input. Infeasible and unbounded programs are reported through the status.
Solution solve(const LinearProgram& lp, const SolveOptions& options = {});

/// Largest violation of any constraint or bound by `values` (0 when feasible).
double max_violation(const LinearProgram& lp, const std::vector<double>& values);

/// Plain-text dump for offline inspection:
///   lp <num_vars> <num_ineq> <num_eq>
///   min <c_0> ... <c_{n-1}>
///   lb <lb_0> ... <lb_{n-1}>
///   le <a_0> ... <a_{n-1}> <rhs>      (one line per inequality)
///   eq <a_0> ... <a_{n-1}> <rhs>      (one line per equality)
void write_text(std::ostream& out, const LinearProgram& lp);

}  // namespace ccce::lp
