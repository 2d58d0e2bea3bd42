#pragma once

// Reference implementations used only by the tests. They deliberately share no
// code with the library.

#include <cmath>
#include <cstddef>
#include <vector>

namespace oracle {

/// Standard normal CDF from the Maclaurin series of erf, summed in long
/// double until the terms vanish. The alternating series cancels badly in the
/// tails; the extended precision keeps the absolute error near 1e-15 for
/// |x| <= 5.
inline double normal_cdf(double x) {
    const long double z = x / std::sqrt(2.0L);
    long double term = z;
    long double sum = z;
    for (int n = 1; n < 1000; ++n) {
        term *= -z * z / n;
        const long double add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-24L) break;
    }
    const long double erf = 2.0L / std::sqrt(3.14159265358979323846264338327950288L) * sum;
    return static_cast<double>(0.5L * (1.0L + erf));
}

/// Quantile by bisection on normal_cdf, to 1e-12.
inline double normal_quantile(double p) {
    double lo = -6.0, hi = 6.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (normal_cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

/// Dense game for oracle checks: cost[i][flat] with agent 0 most significant.
struct Game {
    std::vector<std::size_t> counts;
    std::vector<std::vector<double>> cost;

    std::size_t size() const {
        std::size_t s = 1;
        for (auto c : counts) s *= c;
        return s;
    }
    std::vector<std::size_t> coords(std::size_t flat) const {
        std::vector<std::size_t> out(counts.size());
        for (std::size_t i = counts.size(); i-- > 0;) {
            out[i] = flat % counts[i];
            flat /= counts[i];
        }
        return out;
    }
    std::size_t flat(const std::vector<std::size_t>& c) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) f = f * counts[i] + c[i];
        return f;
    }
};

/// Normalized chance-constrained CE check written straight from the
/// definition: for every agent i, recommendation r with P(r) > 0 and
/// alternative a != r,  E[J_i(r, x_-i) - J_i(a, x_-i) | r] + t_i <= tol.
inline bool ccce_feasible(const Game& g, const std::vector<double>& z,
                          const std::vector<double>& t, double tol) {
    for (std::size_t i = 0; i < g.counts.size(); ++i) {
        for (std::size_t r = 0; r < g.counts[i]; ++r) {
            double pr = 0.0;
            for (std::size_t x = 0; x < g.size(); ++x)
                if (g.coords(x)[i] == r) pr += z[x];
            if (pr <= 0.0) continue;
            for (std::size_t a = 0; a < g.counts[i]; ++a) {
                if (a == r) continue;
                double s = 0.0;
                for (std::size_t x = 0; x < g.size(); ++x) {
                    auto c = g.coords(x);
                    if (c[i] != r) continue;
                    auto d = c;
                    d[i] = a;
                    s += z[x] * (g.cost[i][x] - g.cost[i][g.flat(d)]);
                }
                // Compare in weighted form so that the tolerance scales like
                // the library's replay.
                if (s + t[i] * pr > tol) return false;
            }
        }
    }
    return true;
}

}  // namespace oracle
