#include "msarch/model.hpp"

#include "msarch/errors.hpp"
#include "msarch/stationary_series.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace msarch {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void validate(const VolatilityMixture& mixture) {
    if (const auto* ig = std::get_if<InverseGamma>(&mixture)) {
        if (!(ig->alpha > 0.0) || !(ig->beta > 0.0) || !std::isfinite(ig->alpha) ||
            !std::isfinite(ig->beta))
            throw PreconditionViolation("inverse-gamma mixture needs alpha > 0 and beta > 0");
    } else {
        const auto& pt = std::get<PointVol>(mixture);
        if (!(pt.sigma0 > 0.0) || !std::isfinite(pt.sigma0))
            throw PreconditionViolation("point mixture needs sigma0 > 0");
    }
}

bool is_inverse_gamma(const VolatilityMixture& mixture) {
    return std::holds_alternative<InverseGamma>(mixture);
}

void ModelParams::validate() const {
    if (!(D > 0.0) || !std::isfinite(D)) throw PreconditionViolation("D must be positive, got " + fmt(D));
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1], got " + fmt(nu));
    if (M < 1) throw PreconditionViolation("memory order M must be >= 1");
    msarch::validate(mixture);
}

void Theta::validate() const {
    if (!(D > 0.0) || !std::isfinite(D)) throw PreconditionViolation("D must be positive, got " + fmt(D));
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1], got " + fmt(nu));
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw PreconditionViolation("alpha must be positive, got " + fmt(alpha));
}

double rescale_factor_sq(std::int64_t i, double D) {
    if (i <= 1 || D == 0.5) return 1.0;
    const double x = static_cast<double>(i);
    // i^{2D} (1 - (1 - 1/i)^{2D})
    return -std::expm1(2.0 * D * std::log1p(-1.0 / x)) * std::pow(x, 2.0 * D);
}

double rescale_factor(std::int64_t i, double D) { return std::sqrt(rescale_factor_sq(i, D)); }

double rescale_block_sq(std::int64_t i, std::int64_t L, double D) {
    const double top = static_cast<double>(i + L - 1);
    if (i <= 1) return std::pow(top, 2.0 * D);
    return -std::expm1(2.0 * D * std::log1p(-static_cast<double>(L) / top)) * std::pow(top, 2.0 * D);
}

double restart_stationary_pmf(std::int64_t i, double nu) {
    if (i < 1) return 0.0;
    if (nu >= 1.0) return i == 1 ? 1.0 : 0.0;
    return nu * std::exp(static_cast<double>(i - 1) * std::log1p(-nu));
}

double restart_transition_prob(std::int64_t i, std::int64_t j, double nu) {
    if (i == 1) return nu;
    if (i == j + 1) return 1.0 - nu;
    return 0.0;
}

std::int64_t geometric_truncation(double nu, double eps) {
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1]");
    if (!(eps > 0.0 && eps < 1.0)) throw PreconditionViolation("eps must lie in (0, 1)");
    if (nu >= 1.0) return 1;
    const double log_keep = std::log1p(-nu);
    auto n = static_cast<std::int64_t>(std::ceil(std::log(eps) / log_keep));
    n = std::max<std::int64_t>(n, 1);
    // settle rounding at the boundary
    while (static_cast<double>(n) * log_keep >= std::log(eps)) ++n;
    while (n > 1 && static_cast<double>(n - 1) * log_keep < std::log(eps)) --n;
    return n;
}

double student_abs_moment(double q, double dof) {
    if (!(dof > 0.0)) throw PreconditionViolation("degrees of freedom must be positive");
    if (q < 0.0) throw PreconditionViolation("moment order must be non-negative");
    if (q >= dof)
        throw MomentDiverges("E|Z|^" + fmt(q) + " diverges for " + fmt(dof) + " degrees of freedom");
    if (q == 0.0) return 1.0;
    return std::exp(std::lgamma(0.5 * (q + 1.0)) + std::lgamma(0.5 * (dof - q)) -
                    0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * dof));
}

namespace {

// 2^{q/2} Gamma((q+1)/2) / sqrt(pi) = E|N(0,1)|^q
double gaussian_abs_moment(double q) {
    return std::exp(0.5 * q * std::numbers::ln2 + std::lgamma(0.5 * (q + 1.0)) -
                    0.5 * std::log(std::numbers::pi));
}

}  // namespace

double endo_abs_moment(double q, const VolatilityMixture& mixture) {
    validate(mixture);
    if (q < 0.0) throw PreconditionViolation("moment order must be non-negative");
    if (const auto* ig = std::get_if<InverseGamma>(&mixture))
        return std::pow(ig->beta, q) * student_abs_moment(q, ig->alpha);
    const auto& pt = std::get<PointVol>(mixture);
    return std::pow(pt.sigma0, q) * gaussian_abs_moment(q);
}

double endo_cross_moment(double q, const VolatilityMixture& mixture) {
    validate(mixture);
    if (q < 0.0) throw PreconditionViolation("moment order must be non-negative");
    if (const auto* ig = std::get_if<InverseGamma>(&mixture)) {
        if (2.0 * q >= ig->alpha)
            throw MomentDiverges("E|Y1|^q|Y2|^q diverges: 2q = " + fmt(2.0 * q) +
                                 " >= alpha = " + fmt(ig->alpha));
        if (q == 0.0) return 1.0;
        // (E|N|^q)^2 E_rho[sigma^{2q}],  E_rho[sigma^p] = (beta^2/2)^{p/2} G((alpha-p)/2)/G(alpha/2)
        return std::exp(2.0 * std::lgamma(0.5 * (q + 1.0)) + 2.0 * q * std::log(ig->beta) +
                        std::lgamma(0.5 * ig->alpha - q) - std::log(std::numbers::pi) -
                        std::lgamma(0.5 * ig->alpha));
    }
    const double m = endo_abs_moment(q, mixture);
    return m * m;
}

Certified a_power_moment(double q, double nu, double D, double eps) {
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1]");
    if (!(D > 0.0)) throw PreconditionViolation("D must be positive");
    if (!(eps > 0.0)) throw PreconditionViolation("eps must be positive");
    if (nu >= 1.0 || q == 0.0 || D == 0.5) return {1.0, 0.0};

    const PowerEnvelope env = a_power_envelope(q, D);
    if (env.exponent > 60.0)
        throw SeriesUnstable("a_i^q grows too fast for q = " + fmt(q) + ", D = " + fmt(D));
    const std::int64_t n = stationary_truncation(nu, eps, env);

    const double log_keep = std::log1p(-nu);
    double sum = 0.0;
    double weight = nu;
    for (std::int64_t i = 1; i <= n; ++i) {
        sum += weight * std::pow(rescale_factor_sq(i, D), 0.5 * q);
        weight = nu * std::exp(static_cast<double>(i) * log_keep);
    }
    if (!std::isfinite(sum)) throw SeriesUnstable("E[a^q] overflowed");
    return {sum, stationary_tail_bound(nu, n, env)};
}

}  // namespace msarch
