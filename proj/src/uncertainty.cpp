#include "ccce/uncertainty.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ccce {

namespace {

// Acklam's rational approximation, relative error ~1.15e-9 before refinement.
constexpr double kA[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                         -2.759285104469687e+02, 1.383577518672690e+02,
                         -3.066479806614716e+01, 2.506628277459239e+00};
constexpr double kB[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                         -1.556989798598866e+02, 6.680131188771972e+01,
                         -1.328068155288572e+01};
constexpr double kC[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                         -2.400758277161838e+00, -2.549732539343734e+00,
                         4.374664141464968e+00, 2.938163982698783e+00};
constexpr double kD[] = {7.784695709041462e-03, 3.224671290700398e-01,
                         2.445134137142996e+00, 3.754408661907416e+00};
constexpr double kLow = 0.02425;

double acklam(double p) {
    if (p < kLow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    if (p > 1.0 - kLow) {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        return -(((((kC[0] * q + kC[1]) * q + kC[2]) * q + kC[3]) * q + kC[4]) * q + kC[5]) /
               ((((kD[0] * q + kD[1]) * q + kD[2]) * q + kD[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((kA[0] * r + kA[1]) * r + kA[2]) * r + kA[3]) * r + kA[4]) * r + kA[5]) * q /
           (((((kB[0] * r + kB[1]) * r + kB[2]) * r + kB[3]) * r + kB[4]) * r + 1.0);
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double standard_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("quantile level must lie in (0,1)");
    if (p == 0.5) return 0.0;
    double x = acklam(p);
    // One Halley step on the CDF; erfc keeps the residual accurate in the tails.
    const double e = standard_normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

PerturbationDist PerturbationDist::gaussian(double sigma) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("sigma must be finite and nonnegative");
    return {PerturbationKind::gaussian, sigma};
}

double quantile(const PerturbationDist& dist, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("confidence level must lie in (0,1)");
    const double sigma = dist.effective_sigma();
    if (sigma == 0.0) return 0.0;
    return sigma * standard_normal_quantile(alpha);
}

double sample(const PerturbationDist& dist, Rng& rng) {
    const double sigma = dist.effective_sigma();
    if (sigma == 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng);
}

UncertaintyModel UncertaintyModel::nominal(std::size_t num_agents) {
    return {std::vector<PerturbationDist>(num_agents, PerturbationDist::degenerate())};
}

UncertaintyModel UncertaintyModel::gaussian(std::size_t num_agents, double sigma) {
    return {std::vector<PerturbationDist>(num_agents, PerturbationDist::gaussian(sigma))};
}

UncertaintyModel UncertaintyModel::gaussian(const std::vector<double>& sigmas) {
    UncertaintyModel m;
    m.per_agent.reserve(sigmas.size());
    for (double s : sigmas) m.per_agent.push_back(PerturbationDist::gaussian(s));
    return m;
}

std::vector<double> UncertaintyModel::thresholds(double alpha) const {
    std::vector<double> out;
    out.reserve(per_agent.size());
    for (const auto& d : per_agent) out.push_back(quantile(d, alpha));
    return out;
}

}  // namespace ccce
