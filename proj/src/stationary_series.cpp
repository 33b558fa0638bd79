#include "msarch/stationary_series.hpp"

#include "msarch/errors.hpp"
#include "msarch/model.hpp"

#include <cmath>
#include <limits>

namespace msarch {

double stationary_tail_bound(double nu, std::int64_t n, PowerEnvelope env) {
    if (nu >= 1.0) return 0.0;
    const double log_keep = std::log1p(-nu);
    const double next = static_cast<double>(n + 1);
    const double log_term =
        std::log(nu) + static_cast<double>(n) * log_keep + std::log(env.scale) + env.exponent * std::log(next);
    if (env.exponent <= 0.0) {
        // envelope non-increasing: bound by first neglected envelope value times tail mass
        return std::exp(static_cast<double>(n) * log_keep + std::log(env.scale) +
                        env.exponent * std::log(next));
    }
    // successive-term ratios decrease in i, so the first one bounds all of them
    const double ratio = std::exp(log_keep + env.exponent * std::log1p(1.0 / next));
    if (ratio >= 1.0) return std::numeric_limits<double>::infinity();
    return std::exp(log_term) / (1.0 - ratio);
}

std::int64_t stationary_truncation(double nu, double eps, PowerEnvelope env, std::int64_t max_terms) {
    if (nu >= 1.0) return 1;
    std::int64_t n = geometric_truncation(nu, std::min(eps, 0.5));
    while (!(stationary_tail_bound(nu, n, env) < eps)) {
        n += std::max<std::int64_t>(1, n / 8);
        if (n > max_terms)
            throw SeriesUnstable("stationary series needs more than " + std::to_string(max_terms) + " terms");
    }
    return n;
}

PowerEnvelope a_power_envelope(double q, double D) {
    // a_i^2 = 2D xi^{2D-1} for some xi in (i-1, i): a_i <= 1 when D <= 1/2 and
    // a_i^2 >= 2D i^{2D-1}; the inequalities reverse for D > 1/2.
    const double e = (D - 0.5) * q;
    if (e <= 0.0) return {1.0, 0.0};
    return {std::max(1.0, std::pow(2.0 * D, 0.5 * q)), e};
}

}  // namespace msarch
