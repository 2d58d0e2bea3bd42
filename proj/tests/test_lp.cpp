#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "ccce/equilibrium.hpp"
#include "ccce/lp.hpp"
#include "helpers.hpp"

using namespace ccce;
using namespace ccce::lp;

namespace {

/// Solves the square system a x = b by Gaussian elimination with partial
/// pivoting; false if singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b,
                  std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (std::abs(a[p][c]) < 1e-12) return false;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

/// Minimum of c.v over {A v <= b, sum v = 1, v >= 0} by visiting every
/// vertex: choose n-1 tight inequalities (from rows and bounds) plus the
/// equality. Returns +inf when empty.
double brute_force_vertex_min(const std::vector<std::vector<double>>& rows,
                              const std::vector<double>& rhs, const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<std::vector<double>> all = rows;
    std::vector<double> all_rhs = rhs;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> e(n, 0.0);
        e[j] = -1.0;
        all.push_back(e);
        all_rhs.push_back(0.0);
    }
    const std::size_t m = all.size();
    double best = INFINITY;
    std::vector<bool> pick(m, false);
    std::fill(pick.begin(), pick.begin() + static_cast<long>(n - 1), true);
    std::sort(pick.begin(), pick.end());
    do {
        std::vector<std::vector<double>> a{std::vector<double>(n, 1.0)};
        std::vector<double> b{1.0};
        for (std::size_t k = 0; k < m; ++k)
            if (pick[k]) {
                a.push_back(all[k]);
                b.push_back(all_rhs[k]);
            }
        std::vector<double> v;
        if (!solve_square(a, b, v)) continue;
        bool ok = true;
        for (std::size_t k = 0; k < m && ok; ++k) {
            double s = 0.0;
            for (std::size_t j = 0; j < n; ++j) s += all[k][j] * v[j];
            ok = s <= all_rhs[k] + 1e-9;
        }
        if (!ok) continue;
        double f = 0.0;
        for (std::size_t j = 0; j < n; ++j) f += c[j] * v[j];
        best = std::min(best, f);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
}

}  // namespace

TEST_CASE("forced objective") {
    LinearProgram lp(2);
    lp.objective = {1, 1};
    lp.eq.push_back({{1, 1}, 1});
    const auto s = solve(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(1.0));
    CHECK(max_violation(lp, s.values) <= 1e-7);
}

TEST_CASE("single active bound") {
    LinearProgram lp(1);
    lp.objective = {-1};
    lp.ineq.push_back({{1}, 3});
    const auto s = solve(lp);
    REQUIRE(s.optimal());
    CHECK(s.values[0] == doctest::Approx(3.0));
    CHECK(s.objective_value == doctest::Approx(-3.0));
}

TEST_CASE("infeasible and unbounded programs are reported") {
    LinearProgram inf(2);
    inf.ineq.push_back({{1, 1}, -1});
    CHECK(solve(inf).status == Status::infeasible);

    LinearProgram inf_eq(2);
    inf_eq.eq.push_back({{1, 1}, 1});
    inf_eq.eq.push_back({{1, 1}, 2});
    CHECK(solve(inf_eq).status == Status::infeasible);

    LinearProgram unb(2);
    unb.objective = {-1, 0};
    unb.ineq.push_back({{-1, 1}, 1});
    CHECK(solve(unb).status == Status::unbounded);

    LinearProgram bounds_only(2);
    bounds_only.objective = {1, 2};
    bounds_only.lower_bounds = {-1, 3};
    const auto s = solve(bounds_only);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(5.0));
}

TEST_CASE("malformed programs are rejected") {
    LinearProgram lp(2);
    lp.ineq.push_back({{1}, 1});
    CHECK_THROWS_AS(solve(lp), std::invalid_argument);
    LinearProgram nan(1);
    nan.objective = {std::nan("")};
    CHECK_THROWS_AS(solve(nan), std::invalid_argument);
    CHECK_THROWS_AS(solve(LinearProgram(0)), std::invalid_argument);
}

TEST_CASE("degenerate program that cycles under the largest-coefficient rule") {
    // Beale's example.
    LinearProgram lp(4);
    lp.objective = {-0.75, 150, -0.02, 6};
    lp.ineq.push_back({{0.25, -60, -0.04, 9}, 0});
    lp.ineq.push_back({{0.5, -90, -0.02, 3}, 0});
    lp.ineq.push_back({{0, 0, 1, 0}, 1});
    const auto s = solve(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(-0.05));
}

TEST_CASE("random programs with a planted optimum") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 2 + rep % 7;
        const std::size_t m_ineq = 1 + rep % 5;
        const std::size_t m_eq = rep % 3;

        // Optimal point: some coordinates at the lower bound, the rest inside.
        std::vector<double> lb(n), x(n);
        for (std::size_t j = 0; j < n; ++j) {
            lb[j] = rep % 2 ? std::round(u(rng) * 3) : 0.0;
            x[j] = lb[j] + (rng() % 3 == 0 ? 0.0 : pos(rng));
        }
        LinearProgram lp(n);
        lp.lower_bounds = lb;
        std::vector<double> grad(n, 0.0);  // sum of multipliers times row
        auto add_row = [&](bool eq, bool active) {
            std::vector<double> a(n);
            for (auto& v : a) v = u(rng);
            double ax = 0.0;
            for (std::size_t j = 0; j < n; ++j) ax += a[j] * x[j];
            if (eq) {
                const double y = u(rng);
                for (std::size_t j = 0; j < n; ++j) grad[j] += y * a[j];
                lp.eq.push_back({a, ax});
            } else if (active) {
                const double y = pos(rng);
                for (std::size_t j = 0; j < n; ++j) grad[j] += y * a[j];
                lp.ineq.push_back({a, ax});
            } else {
                lp.ineq.push_back({a, ax + pos(rng)});
            }
        };
        for (std::size_t k = 0; k < m_ineq; ++k) add_row(false, k % 2 == 0);
        for (std::size_t k = 0; k < m_eq; ++k) add_row(true, true);
        // KKT: c + grad - r = 0 with r >= 0 only on coordinates at their bound.
        for (std::size_t j = 0; j < n; ++j) {
            const double r = x[j] == lb[j] ? pos(rng) : 0.0;
            lp.objective[j] = r - grad[j];
        }
        double want = 0.0;
        for (std::size_t j = 0; j < n; ++j) want += lp.objective[j] * x[j];

        const auto s = solve(lp);
        REQUIRE(s.optimal());
        CHECK(std::abs(s.objective_value - want) <= 1e-6 * std::max(1.0, std::abs(want)));
        CHECK(max_violation(lp, s.values) <= 1e-7);
        for (std::size_t j = 0; j < n; ++j) CHECK(s.values[j] >= lb[j] - 1e-9);
    }
}

TEST_CASE("solutions replay against every constraint") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    int solved = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = 3 + rep % 6;
        LinearProgram lp(n);
        for (auto& c : lp.objective) c = u(rng);
        for (std::size_t k = 0; k < n + 2; ++k) {
            std::vector<double> a(n);
            for (auto& v : a) v = u(rng);
            lp.ineq.push_back({a, u(rng) + 0.5});
        }
        std::vector<double> ones(n, 1.0);
        lp.ineq.push_back({ones, 10.0});
        const auto s = solve(lp);
        if (!s.optimal()) continue;
        ++solved;
        for (const auto& r : lp.ineq) {
            double lhs = 0.0;
            for (std::size_t j = 0; j < n; ++j) lhs += r.coeffs[j] * s.values[j];
            CHECK(lhs <= r.rhs + 1e-7);
        }
        for (double v : s.values) CHECK(v >= -1e-9);
    }
    CHECK(solved > 50);
}

TEST_CASE("intersection game CE selection matches vertex enumeration") {
    const auto g = testing::intersection_game();
    const auto program = assemble_ce_constraints(g, Tightening{
        {{0, 0, 1}, 0.0}, {{0, 1, 0}, 0.0}, {{1, 0, 1}, 0.0}, {{1, 1, 0}, 0.0}});
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    for (const auto& r : program.ineq) {
        rows.push_back(r.coeffs);
        rhs.push_back(r.rhs);
    }
    const auto sys = testing::social_cost(g);
    const double oracle_min = brute_force_vertex_min(rows, rhs, sys);
    CHECK(oracle_min == doctest::Approx(0.0));

    LinearProgram lp = program;
    lp.objective = sys;
    const auto s = solve(lp);
    REQUIRE(s.optimal());
    CHECK(s.objective_value == doctest::Approx(oracle_min));
    CHECK(s.values[0] == doctest::Approx(0.0));
    CHECK(s.values[3] == doctest::Approx(0.0));
}

TEST_CASE("random CE programs match vertex enumeration") {
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 60; ++rep) {
        const auto g = testing::random_game(rng, {2, 2}, -3, 3);
        Tightening t;
        for (const auto& c : deviation_constraints(g)) t[c] = 0.0;
        auto lp = assemble_ce_constraints(g, t);
        std::vector<std::vector<double>> rows;
        std::vector<double> rhs;
        for (const auto& r : lp.ineq) {
            rows.push_back(r.coeffs);
            rhs.push_back(r.rhs);
        }
        const auto sys = testing::social_cost(g);
        lp.objective = sys;
        const auto s = solve(lp);
        REQUIRE(s.optimal());  // a mixed Nash equilibrium always exists
        CHECK(s.objective_value == doctest::Approx(brute_force_vertex_min(rows, rhs, sys)));
    }
}

TEST_CASE("size guard, deadline and iteration determinism") {
    LinearProgram lp(50);
    for (std::size_t k = 0; k < 40; ++k) {
        std::vector<double> a(50, 0.0);
        a[k] = 1.0;
        a[k + 1] = -1.0;
        lp.ineq.push_back({a, 1.0});
    }
    lp.objective.assign(50, -1.0);
    lp.ineq.push_back({std::vector<double>(50, 1.0), 100.0});

    SolveOptions tiny;
    tiny.max_tableau_entries = 100;
    CHECK_THROWS_AS(solve(lp, tiny), SolverFailure);

    SolveOptions past;
    past.deadline = std::chrono::steady_clock::now() - std::chrono::seconds(1);
    CHECK_THROWS_AS(solve(lp, past), SolveTimeout);

    const auto a = solve(lp);
    const auto b = solve(lp);
    REQUIRE(a.optimal());
    CHECK(a.values == b.values);
    CHECK(a.iterations == b.iterations);
    CHECK(a.objective_value == doctest::Approx(-100.0));
}

TEST_CASE("text dump format") {
    LinearProgram lp(2);
    lp.objective = {1, -2};
    lp.ineq.push_back({{1, 1}, 4});
    lp.eq.push_back({{1, -1}, 0.5});
    std::ostringstream out;
    write_text(out, lp);
    CHECK(out.str() == "lp 2 1 1\nmin 1 -2\nlb 0 0\nle 1 1 4\neq 1 -1 0.5\n");
}
