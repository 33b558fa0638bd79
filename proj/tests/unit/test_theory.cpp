#include "doctest.h"

#include "msarch/errors.hpp"
#include "msarch/simulate.hpp"
#include "msarch/theory.hpp"
#include "support/oracles.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace msarch;

namespace {

// E[a_I^q] by a long direct sum of the naive formula
double brute_a_moment(double q, double nu, double D) {
    long double s = 0.0L;
    const long n = static_cast<long>(60.0 / nu);
    for (long i = n; i >= 1; --i)
        s += nu * std::pow(1.0L - nu, static_cast<long double>(i - 1)) *
             std::pow(static_cast<long double>(oracle::a_sq(i, D)), 0.5L * q);
    return static_cast<double>(s);
}

}  // namespace

TEST_CASE("moment ratio trivial values") {
    for (double D : {0.16, 0.25, 0.7}) {
        const auto c = moment_ratio_curve(2.0, 64, D, 0.01, 1e-10);
        for (int t = 1; t <= 64; ++t) CHECK(std::abs(c.values[t - 1] - t) < 1e-8);
    }
    CHECK(moment_ratio(3.3, 1, Theta{0.2, 0.05, 4.0}).value == 1.0);
    const auto flat = moment_ratio_curve(1.0, 20, 0.5, 0.01);
    for (int t = 1; t <= 20; ++t) CHECK(flat.values[t - 1] == doctest::Approx(std::sqrt(t)));
    CHECK_THROWS_AS(moment_ratio_curve(1.0, 0, 0.2, 0.1), PreconditionViolation);
}

TEST_CASE("moment ratio matches exhaustive enumeration") {
    for (double q : {0.5, 1.0, 3.0, 4.0, -0.5})
        for (double nu : {0.5, 0.8})
            for (double D : {0.2, 0.35, 0.6}) {
                const auto c = moment_ratio_curve(q, 10, D, nu, 1e-12);
                for (int t : {2, 5, 10}) {
                    const double ref = oracle::enumerate_moment_ratio(q, t, D, nu, 50);
                    INFO("q=" << q << " nu=" << nu << " D=" << D << " t=" << t);
                    CHECK(std::abs(c.values[t - 1] - ref) < 1e-10);
                    CHECK(c.error_bounds[t - 1] <= 1e-12);
                }
            }
}

TEST_CASE("moment ratio at a small restart rate agrees with Monte Carlo") {
    const double D = 0.25, nu = 0.01, q = 1.0;
    const int T = 31;
    const auto c = moment_ratio_curve(q, T, D, nu, 1e-10);
    const double A = brute_a_moment(q, nu, D);
    const int paths = 300000;
    std::vector<double> sum(T, 0.0), sum2(T, 0.0);
    for (int r = 0; r < paths; ++r) {
        const auto path = sample_restart_path(nu, T, {123, static_cast<std::uint64_t>(r)});
        double s = 0.0;
        for (int t = 0; t < T; ++t) {
            s += oracle::a_sq(path[t], D);
            const double v = std::pow(s, 0.5 * q);
            sum[t] += v;
            sum2[t] += v * v;
        }
    }
    for (int t = 0; t < T; ++t) {
        const double mean = sum[t] / paths;
        const double se = std::sqrt((sum2[t] / paths - mean * mean) / paths);
        CHECK(std::abs(mean / A - c.values[t]) < 4 * se / A);
    }
}

TEST_CASE("Jensen bounds on a parameter grid") {
    for (double D : {0.1, 0.25, 0.4, 0.6})
        for (double nu : {0.003, 0.03, 0.3})
            for (double q : {0.5, 1.0, 3.0, 4.0}) {
                const auto c = moment_ratio_curve(q, 30, D, nu, 1e-9);
                for (int t = 1; t <= 30; ++t) {
                    const double ref = std::pow(t, 0.5 * q);
                    if (q <= 2.0)
                        CHECK(c.values[t - 1] >= ref * (1 - 1e-12));
                    else
                        CHECK(c.values[t - 1] <= ref * (1 + 1e-12));
                }
            }
}

TEST_CASE("rare restarts approach the small-rate limit") {
    CHECK(small_nu_moment_limit(2.0, 17, 0.2) == doctest::Approx(17.0));
    CHECK(small_nu_moment_limit(1.5, 9, 0.3) == doctest::Approx(std::pow(9.0, 0.75)));
    const auto c = moment_ratio_curve(6.0, 31, 0.2, 1e-6, 1e-6);
    for (int t : {2, 5, 10, 20, 31}) {
        const double lim = small_nu_moment_limit(6.0, t, 0.2);
        CHECK(std::abs(c.values[t - 1] / lim - 1.0) < 0.01);
    }
    CHECK_THROWS_AS(small_nu_moment_limit(3.0, 4, 0.6), PreconditionViolation);
}

TEST_CASE("modulating autocorrelation") {
    CHECK(acf_modulating(1.0, 1, Theta{0.2, 0.05, 4.0}) == 1.0);
    CHECK_THROWS_AS(acf_modulating(1.0, 3, Theta{0.2, 1.0, 4.0}), DegenerateModulation);
    CHECK_THROWS_AS(acf_modulating(1.0, 3, Theta{0.5, 0.1, 4.0}), DegenerateModulation);
    const auto near_one = acf_modulating_curve(1.0, 40, 0.25, 1e-5);
    const auto farther = acf_modulating_curve(1.0, 40, 0.25, 1e-4);
    for (int t = 2; t <= 40; ++t) {
        CHECK(near_one[t - 1] > 0.9);
        CHECK(near_one[t - 1] > farther[t - 1]);
    }

    // direct double sum oracle
    const double D = 0.3, nu = 0.1, q = 1.5;
    const auto r = acf_modulating_curve(q, 12, D, nu);
    const double A = brute_a_moment(q, nu, D), A2 = brute_a_moment(2 * q, nu, D);
    for (int t = 2; t <= 12; ++t) {
        long double cross = 0.0L, shifted = 0.0L;
        for (long i = 1; i < 2000; ++i) {
            const long double w = nu * std::pow(1.0L - nu, static_cast<long double>(i - 1));
            const long double a1 = std::pow(oracle::a_sq(i, D), 0.5 * q);
            const long double at = std::pow(oracle::a_sq(i + t - 1, D), 0.5 * q);
            cross += w * a1 * at;
            shifted += w * at;
        }
        const double ref = std::pow(1 - nu, t - 1) * static_cast<double>(cross - A * shifted) / (A2 - A * A);
        CHECK(r[t - 1] == doctest::Approx(ref).epsilon(1e-9));
        // relaxation envelope
        CHECK(std::abs(r[t - 1]) <= std::pow(1 - nu, t - 1) * (1 + 1e-12));
    }
}

TEST_CASE("return autocorrelation structure") {
    ModelParams p;
    p.D = 0.21;
    p.nu = 0.03;
    p.M = 21;
    p.mixture = InverseGamma{4.0, 0.04};
    const auto curve = acf_returns_curve(1.0, 22, p);
    CHECK(curve.values[0] == 1.0);
    const auto uv = acf_coefficients(1.0, p);
    const auto ra = acf_modulating_curve(1.0, 22, p.D, p.nu);
    for (int t = 2; t <= 22; ++t) CHECK(curve.values[t - 1] == doctest::Approx(uv.u + uv.v * ra[t - 1]).epsilon(1e-10));
    CHECK_THROWS_AS(acf_returns_curve(1.0, 23, p), PreconditionViolation);

    p.mixture = PointVol{0.01};
    const auto pt = acf_coefficients(1.0, p);
    CHECK(pt.u == 0.0);
    const auto cp = acf_returns_curve(1.0, 22, p);
    for (int t = 2; t <= 22; ++t) CHECK(cp.values[t - 1] == doctest::Approx(pt.v * ra[t - 1]).epsilon(1e-10));

    p.mixture = InverseGamma{1.5, 0.04};
    CHECK_THROWS_AS(acf_returns_curve(1.0, 5, p), MomentDiverges);
}

TEST_CASE("return autocorrelation against a simulated path") {
    ModelParams p;
    p.D = 0.21;
    p.nu = 0.03;
    p.M = 8;
    p.mixture = InverseGamma{6.0, 0.04};
    const std::size_t T = 2'000'000;
    const auto path = sample_returns(p, T, {31, 0});
    const auto theory = acf_returns_curve(1.0, p.M + 1, p);
    std::vector<double> z(T);
    double mean = 0.0;
    for (std::size_t t = 0; t < T; ++t) mean += z[t] = std::abs(path.x[t]);
    mean /= T;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= T;
    for (int lag = 1; lag <= p.M; ++lag) {
        std::vector<double> prod(T - lag);
        for (std::size_t t = 0; t + lag < T; ++t) prod[t] = (z[t] - mean) * (z[t + lag] - mean) / var;
        const auto ms = oracle::batch_mean(prod, 50);
        CHECK(std::abs(ms.mean - theory.values[lag]) < 4 * ms.se);
    }
}

TEST_CASE("scaling fit") {
    MomentCurve c;
    c.q = 3.0;
    for (int t = 1; t <= 40; ++t) {
        c.ts.push_back(t);
        c.values.push_back(std::pow(t, 1.5));
    }
    const auto fit = hurst_fit(c, 40);
    CHECK(fit.H == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(fit.eps == doctest::Approx(0.0));
    const auto two = hurst_fit(moment_ratio_curve(2.0, 31, 0.25, 0.01), 31);
    CHECK(std::abs(two.H - 0.5) < 1e-10);
    const auto four = hurst_fit(moment_ratio_curve(4.0, 31, 0.25, 0.01), 31);
    CHECK(four.H < 0.5);
    CHECK(four.eps >= 0.0);
}

TEST_CASE("marginal density") {
    ModelParams p;
    p.D = 0.21;
    p.nu = 0.03;
    p.M = 21;
    p.mixture = InverseGamma{4.0, 0.04};
    for (double x : {0.001, 0.02, 0.3})
        CHECK(marginal_pdf(x, p).value == doctest::Approx(marginal_pdf(-x, p).value).epsilon(1e-14));

    boost::math::quadrature::tanh_sinh<double> ts;
    const double half = ts.integrate([&](double x) { return marginal_pdf(x, p, 1e-13).value; }, 0.0,
                                     std::numeric_limits<double>::infinity());
    CHECK(std::abs(2 * half - 1.0) < 1e-6);

    ModelParams one = p;
    one.nu = 1.0;
    const boost::math::students_t_distribution<double> st(4.0);
    for (double x : {-0.2, 0.0, 0.01, 0.1, 1.0}) {
        // Y = beta Z, Z = t_alpha / sqrt(alpha)
        const double ref = boost::math::pdf(st, x / 0.04 * 2.0) * 2.0 / 0.04;
        CHECK(std::abs(marginal_pdf(x, one).value - ref) < 1e-10 * std::max(1.0, ref));
    }

    ModelParams point = p;
    point.mixture = PointVol{0.01};
    const double h2 = ts.integrate([&](double x) { return marginal_pdf(x, point, 1e-13).value; }, 0.0,
                                   std::numeric_limits<double>::infinity());
    CHECK(std::abs(2 * h2 - 1.0) < 1e-6);
}

TEST_CASE("tail constant") {
    ModelParams p;
    p.D = 0.21;
    p.nu = 1.0;
    p.M = 21;
    p.mixture = InverseGamma{4.0, 0.04};
    const double base = std::pow(0.04, 4.0) * std::tgamma(2.5) / (std::sqrt(std::numbers::pi) * std::tgamma(2.0));
    CHECK(tail_constant(p) == doctest::Approx(base).epsilon(1e-12));
    p.nu = 0.03;
    p.D = 0.5;
    CHECK(tail_constant(p) == doctest::Approx(base).epsilon(1e-12));
    p.D = 0.21;
    const double c = tail_constant(p);
    const double sd = std::sqrt(a_power_moment(2.0, p.nu, p.D).value * endo_abs_moment(2.0, p.mixture));
    const double x = 20 * sd;
    const double prod = std::pow(x, 5.0) * marginal_pdf(x, p).value;
    CHECK(std::abs(prod / c - 1.0) < 0.1);
    p.mixture = PointVol{0.01};
    CHECK_THROWS_AS(tail_constant(p), UnsupportedMixture);
}

TEST_CASE("long-memory volatility density") {
    boost::math::quadrature::exp_sinh<double> es;
    for (int t : {1, 21, 63}) {
        const double total = es.integrate([&](double s) { return longmem_vol_pdf(s, t, 5.5, 0.14); }, 1e-14);
        CHECK(std::abs(total - 1.0) < 1e-8);
    }
    const boost::math::students_t_distribution<double> st(4.5);
    for (double s : {0.0, 0.01, 0.07, 0.5}) {
        const double ref = 2.0 * boost::math::pdf(st, s / 0.07 * std::sqrt(4.5)) * std::sqrt(4.5) / 0.07;
        CHECK(std::abs(longmem_vol_pdf(s, 1, 4.5, 0.07) - ref) < 1e-10 * std::max(1.0, ref));
    }
}

TEST_CASE("squared endogenous autocorrelation and its decay rate") {
    CHECK_THROWS_AS(endo_acf2_curve(4.0, 5, 10), MomentDiverges);
    const double alpha = 5.5;
    const int M = 20;
    const auto c = endo_acf2_curve(alpha, M, 400);
    CHECK(c.values[0] == 1.0);
    for (int t = 2; t <= M + 1; ++t) CHECK(c.values[t - 1] == 1.0 / (alpha - 1));
    const double lam = acf_decay_rate(alpha, M);
    double F = 0.0;
    for (int n = 1; n <= M; ++n) F += std::pow(lam, -n);
    CHECK(std::abs(F / (alpha + M - 2) - 1.0) < 1e-10);
    for (int t = 2; t <= 400; ++t) {
        CHECK(c.values[t - 1] >= std::pow(lam, t - 2) / (alpha - 1) * (1 - 1e-12));
        CHECK(c.values[t - 1] <= std::pow(lam, t - M - 1) / (alpha - 1) * (1 + 1e-12));
    }
    // direct recursion oracle
    std::vector<double> r(401, 0.0);
    r[1] = 1.0;
    for (int t = 2; t <= 400; ++t) {
        if (t <= M + 1) {
            r[t] = 1.0 / (alpha - 1);
        } else {
            double s = 0.0;
            for (int n = 1; n <= M; ++n) s += r[t - n];
            r[t] = s / (alpha + M - 2);
        }
        CHECK(c.values[t - 1] == doctest::Approx(r[t]).epsilon(1e-12));
    }
    const double slope = std::log(c.values[399] / c.values[299]) / 100.0;
    CHECK(std::abs(slope / std::log(lam) - 1.0) < 0.01);

    for (double a : {5.0, 10.0, 20.0}) {
        CHECK(acf_decay_rate(a, 10) < acf_decay_rate(a, 30));
        CHECK(acf_decay_rate(a, 30) < acf_decay_rate(a, 50));
    }
    for (int m : {10, 30, 50}) {
        CHECK(acf_decay_rate(5.0, m) > acf_decay_rate(10.0, m));
        CHECK(acf_decay_rate(10.0, m) > acf_decay_rate(20.0, m));
    }
}
