#include "msarch/theory.hpp"

#include "msarch/errors.hpp"
#include "msarch/stationary_series.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <functional>
#include <cmath>
#include <numbers>

namespace msarch {

namespace {

}  // namespace

ModulationStats modulation_stats(double q, int t_max, double D, double nu, double eps) {
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1]");
    if (!(D > 0.0)) throw PreconditionViolation("D must be positive");
    if (t_max < 1) throw PreconditionViolation("t_max must be >= 1");
    if (!(eps > 0.0)) throw PreconditionViolation("eps must be positive");
    ModulationStats mm;
    mm.q = q;
    mm.cov.assign(t_max, 0.0);
    mm.A = a_power_moment(q, nu, D, eps).value;
    mm.A2 = a_power_moment(2.0 * q, nu, D, eps).value;
    mm.cov[0] = mm.A2 - mm.A * mm.A;
    if (nu >= 1.0 || D == 0.5 || t_max == 1) return mm;

    const PowerEnvelope one = a_power_envelope(q, D);
    PowerEnvelope env{1.0, 0.0};
    if (one.exponent > 0.0)
        env = {one.scale * one.scale * std::pow(static_cast<double>(t_max), one.exponent), 2.0 * one.exponent};
    if (env.exponent > 60.0) throw SeriesUnstable("a_i^q grows too fast");
    const std::int64_t n = stationary_truncation(nu, eps, env);

    std::vector<double> cross(t_max, 0.0), shifted(t_max, 0.0), ring(t_max);
    for (int k = 0; k < t_max; ++k) ring[k] = std::pow(rescale_factor_sq(1 + k, D), 0.5 * q);
    const double log_keep = std::log1p(-nu);
    double weight = nu;
    for (std::int64_t i = 1; i <= n; ++i) {
        if ((i & 1023) == 0) weight = nu * std::exp(static_cast<double>(i - 1) * log_keep);
        const auto head = static_cast<std::size_t>((i - 1) % t_max);
        const double first = ring[head];
        for (int k = 0; k < t_max; ++k) {
            const double later = ring[(head + k) % t_max];
            cross[k] += weight * first * later;
            shifted[k] += weight * later;
        }
        ring[head] = std::pow(rescale_factor_sq(i + t_max, D), 0.5 * q);
        weight *= 1.0 - nu;
    }
    for (int k = 1; k < t_max; ++k)
        mm.cov[k] = std::exp(k * log_keep) * (cross[k] - mm.A * shifted[k]);
    return mm;
}

namespace {

double series_term(double i, double t, double D, double p) {
    // ((i+t)^{2D} - i^{2D})^p
    if (i == 0.0) return std::pow(t, 2.0 * D * p);
    return std::pow(std::pow(i, 2.0 * D) * std::expm1(2.0 * D * std::log1p(t / i)), p);
}

// sum_{i>=1} ((i+t)^{2D} - i^{2D})^p for (1-2D)p > 1.
double increment_power_series(double t, double D, double p) {
    constexpr int kExplicit = 20000;
    double sum = 0.0;
    for (int i = kExplicit; i >= 1; --i) sum += series_term(i, t, D, p);
    // Euler-Maclaurin tail from N = kExplicit + 1
    const double N = kExplicit + 1.0;
    boost::math::quadrature::exp_sinh<double> integrator;
    const double integral =
        integrator.integrate([&](double s) { return series_term(N + s, t, D, p); }, 1e-14);
    const double g = std::pow(N, 2.0 * D) * std::expm1(2.0 * D * std::log1p(t / N));
    const double dg = 2.0 * D * (std::pow(N + t, 2.0 * D - 1.0) - std::pow(N, 2.0 * D - 1.0));
    const double df = p * std::pow(g, p - 1.0) * dg;
    return sum + integral + 0.5 * series_term(N, t, D, p) - df / 12.0;
}

}  // namespace

std::vector<double> acf_modulating_curve(double q, int t_max, double D, double nu, double eps) {
    const ModulationStats mm = modulation_stats(q, t_max, D, nu, eps);
    std::vector<double> r(t_max, 0.0);
    r[0] = 1.0;
    if (t_max == 1) return r;
    const double var = mm.A2 - mm.A * mm.A;
    if (nu >= 1.0 || D == 0.5 || !(var > 1e-14 * mm.A2))
        throw DegenerateModulation("a_I^q has zero variance (D = 1/2 or nu = 1)");
    for (int k = 1; k < t_max; ++k) r[k] = mm.cov[k] / var;
    return r;
}

double acf_modulating(double q, int t, const Theta& theta, double eps) {
    if (t < 1) throw PreconditionViolation("t must be >= 1");
    return acf_modulating_curve(q, t, theta.D, theta.nu, eps).back();
}

AcfCoefficients acf_coefficients(double q, const ModelParams& params, double eps) {
    params.validate();
    const double A = a_power_moment(q, params.nu, params.D, eps).value;
    const double A2 = a_power_moment(2.0 * q, params.nu, params.D, eps).value;
    const double B = endo_abs_moment(q, params.mixture);
    const double B2 = endo_abs_moment(2.0 * q, params.mixture);
    const double C = endo_cross_moment(q, params.mixture);
    const double den = A2 * B2 - A * A * B * B;
    if (!(den > 0.0)) throw DegenerateModulation("|X|^q has zero variance");
    AcfCoefficients c;
    c.u = A * A * (C - B * B) / den;
    c.v = (A2 - A * A) * C / den;
    return c;
}

AcfCurve acf_returns_curve(const ModulationStats& stats, const VolatilityMixture& mixture) {
    const double q = stats.q;
    const int t_max = static_cast<int>(stats.cov.size());
    AcfCurve curve;
    curve.q = q;
    curve.ts.resize(t_max);
    curve.values.resize(t_max);
    for (int t = 1; t <= t_max; ++t) curve.ts[t - 1] = t;
    curve.values[0] = 1.0;
    if (t_max == 1) return curve;

    const double B = endo_abs_moment(q, mixture);
    const double B2 = endo_abs_moment(2.0 * q, mixture);
    const double C = endo_cross_moment(q, mixture);
    const double A = stats.A, A2 = stats.A2;
    const double den = A2 * B2 - A * A * B * B;
    if (!(den > 0.0)) throw DegenerateModulation("|X|^q has zero variance");
    // E|X_1 X_t|^q = (A^2 + cov(t)) C
    for (int k = 1; k < t_max; ++k) curve.values[k] = ((A * A + stats.cov[k]) * C - A * A * B * B) / den;
    return curve;
}

AcfCurve acf_returns_curve(double q, int t_max, const ModelParams& params, double eps) {
    params.validate();
    if (t_max < 1 || t_max > params.M + 1)
        throw PreconditionViolation("acf_returns needs 1 <= t <= M + 1");
    // existence of the moments first, before the series work
    endo_cross_moment(q, params.mixture);
    endo_abs_moment(2.0 * q, params.mixture);
    return acf_returns_curve(modulation_stats(q, t_max, params.D, params.nu, eps), params.mixture);
}

double acf_returns(double q, int t, const ModelParams& params, double eps) {
    if (t < 1) throw PreconditionViolation("t must be >= 1");
    return acf_returns_curve(q, t, params, eps).values.back();
}

ScalingFit hurst_fit(const MomentCurve& curve, int window_max) {
    if (!(curve.q > 0.0)) throw PreconditionViolation("hurst_fit needs q > 0");
    if (window_max < 2) throw PreconditionViolation("window must contain t = 2");
    std::vector<double> slopes;
    for (int t = 2; t <= window_max; ++t) {
        const auto it = std::find(curve.ts.begin(), curve.ts.end(), t);
        if (it == curve.ts.end()) throw PreconditionViolation("curve does not cover t = " + std::to_string(t));
        const double m = curve.values[static_cast<std::size_t>(it - curve.ts.begin())];
        if (!(m > 0.0)) throw PreconditionViolation("moment ratios must be positive");
        slopes.push_back(std::log(m) / std::log(static_cast<double>(t)));
    }
    double mean = 0.0;
    for (double s : slopes) mean += s;
    mean /= static_cast<double>(slopes.size());
    double ss = 0.0;
    for (double s : slopes) ss += (s - mean) * (s - mean);
    ScalingFit fit;
    fit.q = curve.q;
    fit.H = mean / curve.q;
    fit.eps = mean != 0.0 ? std::sqrt(ss / static_cast<double>(slopes.size())) / std::abs(mean) : 0.0;
    return fit;
}

Certified marginal_pdf(double x, const ModelParams& params, double eps) {
    params.validate();
    if (!(eps > 0.0)) throw PreconditionViolation("eps must be positive");
    // unit-width kernel phi(y) of one step with a_i = 1
    std::function<double(double)> kernel;
    double peak;
    if (const auto* ig = std::get_if<InverseGamma>(&params.mixture)) {
        const double a = ig->alpha, b = ig->beta;
        const double log_norm = std::lgamma(0.5 * (a + 1.0)) - 0.5 * std::log(std::numbers::pi) -
                                std::log(b) - std::lgamma(0.5 * a);
        kernel = [=](double y) { return std::exp(log_norm - 0.5 * (a + 1.0) * std::log1p((y / b) * (y / b))); };
        peak = std::exp(log_norm);
    } else {
        const double s = std::get<PointVol>(params.mixture).sigma0;
        const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * s);
        kernel = [=](double y) { return norm * std::exp(-0.5 * (y / s) * (y / s)); };
        peak = norm;
    }
    if (params.nu >= 1.0 || params.D == 0.5) return {kernel(x), 0.0};

    const double D = params.D;
    const PowerEnvelope env{peak * std::max(1.0, 1.0 / std::sqrt(2.0 * D)), std::max(0.0, 0.5 - D)};
    const std::int64_t n = stationary_truncation(params.nu, eps, env);
    const double log_keep = std::log1p(-params.nu);
    double sum = 0.0;
    for (std::int64_t i = 1; i <= n; ++i) {
        const double a = rescale_factor(i, D);
        sum += params.nu * std::exp(static_cast<double>(i - 1) * log_keep) * kernel(x / a) / a;
    }
    return {sum, stationary_tail_bound(params.nu, n, env)};
}

double tail_constant(const ModelParams& params, double eps) {
    params.validate();
    const auto* ig = std::get_if<InverseGamma>(&params.mixture);
    if (!ig) throw UnsupportedMixture("tail constant is defined for the inverse-gamma mixture only");
    const double a = ig->alpha;
    const double front = std::exp(a * std::log(ig->beta) + std::lgamma(0.5 * (a + 1.0)) -
                                  0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * a));
    return front * a_power_moment(a, params.nu, params.D, eps).value;
}

double longmem_vol_pdf(double s, int t, double alpha, double beta) {
    if (t < 1) throw PreconditionViolation("t must be >= 1");
    if (!(alpha > 0.0) || !(beta > 0.0)) throw PreconditionViolation("alpha and beta must be positive");
    if (s < 0.0) throw PreconditionViolation("volatility must be non-negative");
    const double tt = static_cast<double>(t);
    if (s == 0.0 && t > 1) return 0.0;
    const double log_beta_fn = std::lgamma(0.5 * alpha) + std::lgamma(0.5 * tt) - std::lgamma(0.5 * (alpha + tt));
    double log_k = std::numbers::ln2 + alpha * std::log(beta) + 0.5 * tt * std::log(tt) - log_beta_fn -
                   0.5 * (alpha + tt) * std::log(beta * beta + s * s * tt);
    if (t > 1) log_k += (tt - 1.0) * std::log(s);
    return std::exp(log_k);
}

AcfCurve endo_acf2_curve(double alpha, int M, int t_max) {
    if (!(alpha > 4.0)) throw MomentDiverges("r_2^Y needs alpha > 4");
    if (M < 1) throw PreconditionViolation("M must be >= 1");
    if (t_max < 1) throw PreconditionViolation("t_max must be >= 1");
    AcfCurve curve;
    curve.q = 2.0;
    curve.ts.resize(t_max);
    curve.values.resize(t_max);
    const double plateau = 1.0 / (alpha - 1.0);
    const double gain = 1.0 / (alpha + M - 2.0);
    double window = 0.0;  // sum of the last M values (t >= 2)
    for (int t = 1; t <= t_max; ++t) {
        curve.ts[t - 1] = t;
        double r;
        if (t == 1)
            r = 1.0;
        else if (t <= M + 1)
            r = plateau;
        else
            r = gain * window;
        curve.values[t - 1] = r;
        if (t >= 2) {
            window += r;
            if (t - M >= 2) window -= curve.values[t - M - 1];
        }
        if (t > M + 1 && t % 512 == 0) {
            window = 0.0;
            for (int k = t - M + 1; k <= t; ++k) window += curve.values[k - 1];
        }
    }
    return curve;
}

double acf_decay_rate(double alpha, int M) {
    if (!(alpha > 2.0)) throw PreconditionViolation("acf_decay_rate needs alpha > 2");
    if (M < 1) throw PreconditionViolation("M must be >= 1");
    const double log_target = std::log(alpha + M - 2.0);
    // ln sum_{n=1}^{M} lambda^{-n} = -M ln(lambda) + ln sum_{k<M} lambda^k, decreasing in lambda
    auto log_sum = [M](double lambda) {
        double geo = 0.0, pw = 1.0;
        for (int k = 0; k < M; ++k) {
            geo += pw;
            pw *= lambda;
        }
        return -M * std::log(lambda) + std::log(geo);
    };
    double lo = 1e-6, hi = 1.0 - 1e-12;
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (log_sum(mid) > log_target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double small_nu_moment_limit(double q, int t, double D) {
    if (!(D > 0.0 && D < 0.5)) throw PreconditionViolation("small_nu_moment_limit needs 0 < D < 1/2");
    if (t < 1) throw PreconditionViolation("t must be >= 1");
    const double p = 0.5 * q;
    const double tt = static_cast<double>(t);
    if ((0.5 - D) * q <= 1.0) return std::pow(tt, p);
    double edge = 0.0;
    for (int tau = 1; tau <= t; ++tau) edge += std::pow(static_cast<double>(tau), D * q);
    const double num = increment_power_series(tt, D, p) + edge;
    const double den = increment_power_series(1.0, D, p) + 1.0;
    return num / den;
}

}  // namespace msarch
