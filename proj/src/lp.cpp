#include "ccce/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace ccce::lp {

const char* to_string(Status s) {
    switch (s) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
    }
    return "unknown";
}

void LinearProgram::validate() const {
    if (num_vars == 0) throw std::invalid_argument("linear program needs at least one variable");
    if (objective.size() != num_vars)
        throw std::invalid_argument("objective length does not match num_vars");
    if (!lower_bounds.empty() && lower_bounds.size() != num_vars)
        throw std::invalid_argument("lower_bounds length does not match num_vars");
    auto finite = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
    };
    if (!finite(objective) || !finite(lower_bounds))
        throw std::invalid_argument("linear program coefficients must be finite");
    for (const auto* rows : {&ineq, &eq})
        for (const auto& r : *rows) {
            if (r.coeffs.size() != num_vars)
                throw std::invalid_argument("constraint row length does not match num_vars");
            if (!finite(r.coeffs) || !std::isfinite(r.rhs))
                throw std::invalid_argument("linear program coefficients must be finite");
        }
}

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kFeasTol = 1e-9;

// Dense tableau in row-major order. Column `cols` holds the right-hand side.
class Tableau {
public:
    Tableau(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * (cols + 1), 0.0), basis_(rows, 0),
          reduced_(cols + 1, 0.0) {}

    double* row(std::size_t r) { return data_.data() + r * (cols_ + 1); }
    const double* row(std::size_t r) const { return data_.data() + r * (cols_ + 1); }
    double& rhs(std::size_t r) { return row(r)[cols_]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::vector<std::size_t>& basis() { return basis_; }

    // Reduced-cost row; the last entry holds minus the objective value.
    std::vector<double>& reduced() { return reduced_; }

    void set_costs(const std::vector<double>& costs) {
        std::fill(reduced_.begin(), reduced_.end(), 0.0);
        std::copy(costs.begin(), costs.end(), reduced_.begin());
        for (std::size_t r = 0; r < rows_; ++r) {
            const double cb = costs[basis_[r]];
            if (cb == 0.0) continue;
            const double* src = row(r);
            for (std::size_t j = 0; j <= cols_; ++j) reduced_[j] -= cb * src[j];
        }
    }

    void pivot(std::size_t pr, std::size_t pc) {
        double* prow = row(pr);
        const double inv = 1.0 / prow[pc];
        for (std::size_t j = 0; j <= cols_; ++j) prow[j] *= inv;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r < rows_; ++r) {
            if (r == pr) continue;
            double* dst = row(r);
            const double f = dst[pc];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) dst[j] -= f * prow[j];
            dst[pc] = 0.0;
        }
        const double f = reduced_[pc];
        if (f != 0.0) {
            for (std::size_t j = 0; j <= cols_; ++j) reduced_[j] -= f * prow[j];
            reduced_[pc] = 0.0;
        }
        basis_[pr] = pc;
    }

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
    std::vector<std::size_t> basis_;
    std::vector<double> reduced_;
};

enum class PhaseResult { optimal, unbounded };

class Simplex {
public:
    Simplex(Tableau& t, std::size_t entering_limit, std::size_t& iterations,
            std::size_t max_iterations, const SolveOptions& options)
        : t_(t), entering_limit_(entering_limit), iterations_(iterations),
          max_iterations_(max_iterations), options_(options) {}

    PhaseResult run() {
        auto& d = t_.reduced();
        for (;;) {
            // Bland: lowest-index improving column.
            std::size_t enter = entering_limit_;
            for (std::size_t j = 0; j < entering_limit_; ++j)
                if (d[j] < -kCostTol) {
                    enter = j;
                    break;
                }
            if (enter == entering_limit_) return PhaseResult::optimal;

            // Ratio test; ties go to the lowest basic column index.
            std::size_t leave = t_.rows();
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < t_.rows(); ++r) {
                const double a = t_.row(r)[enter];
                if (a <= kPivotTol) continue;
                const double ratio = std::max(0.0, t_.rhs(r)) / a;
                const double tie = 1e-12 * (1.0 + std::abs(best));
                if (leave == t_.rows() || ratio < best - tie) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + tie && t_.basis()[r] < t_.basis()[leave]) {
                    leave = r;
                }
            }
            if (leave == t_.rows()) return PhaseResult::unbounded;

            if (++iterations_ > max_iterations_)
                throw SolverFailure("simplex iteration limit exceeded (" +
                                    std::to_string(max_iterations_) + ")");
            if (options_.deadline && (iterations_ & 15u) == 1 &&
                std::chrono::steady_clock::now() > *options_.deadline)
                throw SolveTimeout("linear program exceeded its time budget");
            t_.pivot(leave, enter);
        }
    }

private:
    Tableau& t_;
    std::size_t entering_limit_;
    std::size_t& iterations_;
    std::size_t max_iterations_;
    const SolveOptions& options_;
};

struct PreparedRow {
    std::vector<double> coeffs;
    double rhs;
    int slack_sign;  // +1, -1, or 0 for equalities
};

}  // namespace

Solution solve(const LinearProgram& lp, const SolveOptions& options) {
    lp.validate();
    const std::size_t n = lp.num_vars;
    const std::vector<double> lb = lp.lower_bounds.empty() ? std::vector<double>(n, 0.0)
                                                           : lp.lower_bounds;

    // Shift to w = v - lb >= 0, scale rows, and orient them so rhs >= 0.
    std::vector<PreparedRow> rows;
    rows.reserve(lp.num_constraints());
    auto prepare = [&](const Row& src, bool is_eq) -> bool {
        PreparedRow p{src.coeffs, src.rhs, is_eq ? 0 : 1};
        double scale = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            p.rhs -= p.coeffs[j] * lb[j];
            scale = std::max(scale, std::abs(p.coeffs[j]));
        }
        if (scale == 0.0) {
            // Constant row: either vacuous or a certificate of infeasibility.
            return is_eq ? std::abs(p.rhs) <= kFeasTol : p.rhs >= -kFeasTol;
        }
        for (auto& c : p.coeffs) c /= scale;
        p.rhs /= scale;
        if (p.rhs < 0.0) {
            for (auto& c : p.coeffs) c = -c;
            p.rhs = -p.rhs;
            p.slack_sign = -p.slack_sign;
        }
        rows.push_back(std::move(p));
        return true;
    };
    for (const auto& r : lp.ineq)
        if (!prepare(r, false)) return {Status::infeasible, {}, 0.0, 0};
    for (const auto& r : lp.eq)
        if (!prepare(r, true)) return {Status::infeasible, {}, 0.0, 0};

    const std::size_t num_slack = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const PreparedRow& r) { return r.slack_sign != 0; }));
    const std::size_t num_art = static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const PreparedRow& r) { return r.slack_sign != 1; }));
    const std::size_t m = rows.size();
    const std::size_t art_begin = n + num_slack;
    const std::size_t cols = art_begin + num_art;

    if (m != 0 && (cols + 1) > options.max_tableau_entries / m)
        throw SolverFailure("linear program too large for the dense solver (" + std::to_string(m) +
                            " rows x " + std::to_string(cols) + " columns)");

    const std::size_t max_iterations = 50 * (n + lp.num_constraints());
    std::size_t iterations = 0;

    auto extract = [&](Tableau& t) {
        std::vector<double> w(n, 0.0);
        for (std::size_t r = 0; r < t.rows(); ++r)
            if (t.basis()[r] < n) w[t.basis()[r]] = std::max(0.0, t.rhs(r));
        std::vector<double> v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = lb[j] + w[j];
        return v;
    };
    auto objective_at = [&](const std::vector<double>& v) {
        double f = 0.0;
        for (std::size_t j = 0; j < n; ++j) f += lp.objective[j] * v[j];
        return f;
    };

    if (m == 0) {
        // Only bounds: optimal at lb unless some cost is negative.
        for (double c : lp.objective)
            if (c < 0.0) return {Status::unbounded, {}, 0.0, 0};
        std::vector<double> v = lb;
        return {Status::optimal, v, objective_at(v), 0};
    }

    Tableau t(m, cols);
    {
        std::size_t slack = n, art = art_begin;
        for (std::size_t r = 0; r < m; ++r) {
            double* dst = t.row(r);
            std::copy(rows[r].coeffs.begin(), rows[r].coeffs.end(), dst);
            dst[cols] = rows[r].rhs;
            if (rows[r].slack_sign != 0) dst[slack] = rows[r].slack_sign;
            if (rows[r].slack_sign == 1) {
                t.basis()[r] = slack;
            } else {
                dst[art] = 1.0;
                t.basis()[r] = art++;
            }
            if (rows[r].slack_sign != 0) ++slack;
        }
    }
    rows.clear();
    rows.shrink_to_fit();

    // Phase 1: minimize the sum of artificials.
    if (num_art > 0) {
        std::vector<double> phase1(cols, 0.0);
        std::fill(phase1.begin() + static_cast<std::ptrdiff_t>(art_begin), phase1.end(), 1.0);
        t.set_costs(phase1);
        Simplex(t, cols, iterations, max_iterations, options).run();
        const double infeasibility = -t.reduced()[cols];
        if (infeasibility > 1e-8) return {Status::infeasible, {}, 0.0, iterations};

        // Drive remaining artificials out of the basis where possible.
        for (std::size_t r = 0; r < m; ++r) {
            if (t.basis()[r] < art_begin) continue;
            const double* src = t.row(r);
            std::size_t best = art_begin;
            double best_abs = kPivotTol;
            for (std::size_t j = 0; j < art_begin; ++j)
                if (std::abs(src[j]) > best_abs) {
                    best_abs = std::abs(src[j]);
                    best = j;
                }
            if (best != art_begin) t.pivot(r, best);
            // Otherwise the row is redundant; its artificial stays basic at zero.
        }
    }

    // Phase 2 on the original (scaled) objective; artificials may not re-enter.
    double cscale = 0.0;
    for (double c : lp.objective) cscale = std::max(cscale, std::abs(c));
    if (cscale == 0.0) cscale = 1.0;
    std::vector<double> phase2(cols, 0.0);
    for (std::size_t j = 0; j < n; ++j) phase2[j] = lp.objective[j] / cscale;
    t.set_costs(phase2);
    if (Simplex(t, art_begin, iterations, max_iterations, options).run() == PhaseResult::unbounded)
        return {Status::unbounded, {}, 0.0, iterations};

    auto v = extract(t);
    return {Status::optimal, v, objective_at(v), iterations};
}

double max_violation(const LinearProgram& lp, const std::vector<double>& values) {
    double worst = 0.0;
    for (const auto& r : lp.ineq) {
        double s = 0.0;
        for (std::size_t j = 0; j < lp.num_vars; ++j) s += r.coeffs[j] * values[j];
        worst = std::max(worst, s - r.rhs);
    }
    for (const auto& r : lp.eq) {
        double s = 0.0;
        for (std::size_t j = 0; j < lp.num_vars; ++j) s += r.coeffs[j] * values[j];
        worst = std::max(worst, std::abs(s - r.rhs));
    }
    for (std::size_t j = 0; j < lp.num_vars; ++j) {
        const double lo = lp.lower_bounds.empty() ? 0.0 : lp.lower_bounds[j];
        worst = std::max(worst, lo - values[j]);
    }
    return worst;
}

void write_text(std::ostream& out, const LinearProgram& lp) {
    const auto old = out.precision(17);
    out << "lp " << lp.num_vars << ' ' << lp.ineq.size() << ' ' << lp.eq.size() << '\n';
    out << "min";
    for (double c : lp.objective) out << ' ' << c;
    out << "\nlb";
    for (std::size_t j = 0; j < lp.num_vars; ++j)
        out << ' ' << (lp.lower_bounds.empty() ? 0.0 : lp.lower_bounds[j]);
    out << '\n';
    for (const auto& [tag, rows] : {std::pair{"le", &lp.ineq}, std::pair{"eq", &lp.eq}})
        for (const auto& r : *rows) {
            out << tag;
            for (double c : r.coeffs) out << ' ' << c;
            out << ' ' << r.rhs << '\n';
        }
    out.precision(old);
}

}  // namespace ccce::lp
