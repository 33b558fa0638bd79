#include "doctest.h"

#include "msarch/errors.hpp"
#include "msarch/restarts.hpp"
#include "msarch/simulate.hpp"
#include "msarch/theory.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <numbers>
#include <random>

using namespace msarch;

namespace {

double naive_a(std::int64_t i, double D) {
    return std::sqrt(std::pow(double(i), 2 * D) - std::pow(double(i - 1), 2 * D));
}

// Joint density of a window given its index path, integrating the Gaussian
// scale mixture over sigma numerically.
long double path_density(const std::vector<double>& x, const std::vector<int>& idx, const ModelParams& p) {
    std::vector<double> y(x.size());
    double prod_a = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double a = naive_a(idx[k], p.D);
        y[k] = x[k] / a;
        prod_a *= a;
    }
    double ss = 0.0;
    for (double v : y) ss += v * v;
    const double n = static_cast<double>(x.size());
    if (const auto* ig = std::get_if<InverseGamma>(&p.mixture)) {
        const double a = ig->alpha, b = ig->beta;
        // sigma^2 ~ inverse gamma(a/2, b^2/2)
        auto integrand = [&](double s) {
            const double log_rho = std::log(2.0) + 0.5 * a * std::log(0.5 * b * b) - std::lgamma(0.5 * a) -
                                   (a + 1.0) * std::log(s) - 0.5 * b * b / (s * s);
            const double log_normals = -0.5 * n * std::log(2 * std::numbers::pi * s * s) - 0.5 * ss / (s * s);
            return std::exp(log_rho + log_normals);
        };
        boost::math::quadrature::exp_sinh<double> q;
        return q.integrate(integrand, 1e-15) / prod_a;
    }
    const double s = std::get<PointVol>(p.mixture).sigma0;
    return std::exp(-0.5 * n * std::log(2 * std::numbers::pi * s * s) - 0.5 * ss / (s * s)) / prod_a;
}

struct Brute {
    double prob;
    double density;
};

// Every index path of the window with its chain probability.
Brute brute_force(const std::vector<double>& x, const ModelParams& p, int centre, int i_max) {
    const int n = static_cast<int>(x.size());
    long double total = 0.0L, hit = 0.0L;
    std::vector<int> idx(n);
    for (int i0 = 1; i0 <= i_max; ++i0) {
        for (int mask = 0; mask < (1 << (n - 1)); ++mask) {
            idx[0] = i0;
            long double w = restart_stationary_pmf(i0, p.nu);
            for (int k = 1; k < n; ++k) {
                idx[k] = (mask >> (k - 1)) & 1 ? 1 : idx[k - 1] + 1;
                w *= restart_transition_prob(idx[k], idx[k - 1], p.nu);
            }
            if (w == 0.0L) continue;
            const long double v = w * path_density(x, idx, p);
            total += v;
            if (idx[centre] == 1) hit += v;
        }
    }
    return {static_cast<double>(hit / total), static_cast<double>(total)};
}

}  // namespace

TEST_CASE("window posterior against brute-force enumeration") {
    ModelParams p;
    p.D = 0.2;
    p.nu = 0.3;
    p.M = 5;
    p.mixture = InverseGamma{4.0, 1.0};
    const std::vector<std::vector<double>> windows{
        {0.3, -1.2, 2.5, 0.1, -0.4}, {0.01, 0.02, -3.0, 0.5, 0.2}, {1.0, 1.0, 1.0, 1.0, 1.0}};
    const WindowScanner scan(p, 2);
    for (const auto& w : windows) {
        const auto got = scan(w);
        const auto ref = brute_force(w, p, 2, 90);
        CHECK(got.restart_prob >= 0.0);
        CHECK(got.restart_prob <= 1.0);
        CHECK(std::abs(got.restart_prob - ref.prob) < 1e-12);
        CHECK(std::exp(got.log_density) == doctest::Approx(ref.density).epsilon(1e-12));
    }
    ModelParams q = p;
    q.mixture = PointVol{0.8};
    q.nu = 0.45;
    const WindowScanner scan_q(q, 1);
    for (const auto& w : windows) {
        const std::vector<double> w3(w.begin() + 1, w.begin() + 4);
        const auto got = scan_q(w3);
        const auto ref = brute_force(w3, q, 1, 60);
        CHECK(std::abs(got.restart_prob - ref.prob) < 1e-12);
        CHECK(std::exp(got.log_density) == doctest::Approx(ref.density).epsilon(1e-12));
    }
}

TEST_CASE("single-step window matches the marginal density") {
    ModelParams p;
    p.D = 0.16;
    p.nu = 0.05;
    p.M = 3;
    p.mixture = InverseGamma{5.5, 0.14};
    const WindowScanner scan(p, 0);
    for (double x : {-0.5, -0.05, 0.0, 0.02, 0.3}) {
        const std::vector<double> w{x};
        const auto got = scan(w);
        const double f = marginal_pdf(x, p).value;
        CHECK(std::exp(got.log_density) == doctest::Approx(f).epsilon(1e-10));
        ModelParams fresh = p;
        fresh.nu = 1.0;
        CHECK(got.restart_prob == doctest::Approx(p.nu * marginal_pdf(x, fresh).value / f).epsilon(1e-10));
    }
}

TEST_CASE("posterior edge cases") {
    ModelParams p;
    p.D = 0.3;
    p.nu = 1.0;
    p.M = 4;
    p.mixture = InverseGamma{4.0, 0.1};
    const auto x = sample_returns(p, 20, {5, 0}).x;
    for (std::size_t t = 2; t < 18; ++t) CHECK(restart_posterior(x, t, 2, p) == 1.0);
    CHECK_THROWS_AS(restart_posterior(x, 1, 2, p), PreconditionViolation);
    CHECK_THROWS_AS(restart_posterior(x, 18, 2, p), PreconditionViolation);

    const auto d = detect_restarts(x, p, 2);
    CHECK(d.restart_times.size() == 16);
    CHECK(d.restart_times.front() == 2);
    CHECK(d.restart_times.back() == 17);
    CHECK(d.threshold == 1.0);
    CHECK(std::isnan(d.posterior[0]));

    ModelParams narrow = p;
    narrow.M = 3;
    CHECK_THROWS_AS(restart_posterior(x, 5, 2, narrow), WindowTooWide);
    CHECK_THROWS_AS(detect_restarts(x, narrow, 2), WindowTooWide);
}

TEST_CASE("selection rule") {
    const double nan = std::nan("");
    // peaks at 2 (0.9), 5 (plateau left edge, 0.7), 8 (0.9, later tie)
    const std::vector<double> p{nan, 0.1, 0.9, 0.2, 0.3, 0.7, 0.7, 0.1, 0.9, nan};
    CHECK(select_restarts(p, 2) == std::vector<std::size_t>{2, 8});
    CHECK(select_restarts(p, 3) == std::vector<std::size_t>{2, 5, 8});
    // peaks exhausted: fill from the remaining times by height
    CHECK(select_restarts(p, 4) == std::vector<std::size_t>{2, 5, 6, 8});
    CHECK(select_restarts(p, 0).empty());
    CHECK(restart_budget(0.004, 12000) == 48);
    CHECK(restart_budget(0.001, 500) == 0);
    CHECK(restart_budget(0.01, 250) == 3);
}

TEST_CASE("count-based selection on noise and shift stability") {
    std::mt19937_64 gen(3);
    std::normal_distribution<double> g(0.0, 0.01);
    std::vector<double> x(600);
    for (auto& v : x) v = g(gen);
    ModelParams p;
    p.D = 0.2;
    p.nu = 0.01;
    p.M = 10;
    p.mixture = PointVol{0.01};
    const auto d = detect_restarts(x, p, 2);
    CHECK(d.restart_times.size() == 6);
    for (double v : d.posterior)
        if (!std::isnan(v)) CHECK((v >= 0.0 && v <= 1.0));
    p.nu = 0.001;
    CHECK(detect_restarts(x, p, 2).restart_times.empty());

    p.nu = 0.01;
    const std::size_t k = 37;
    const std::vector<double> shifted(x.begin() + k, x.end());
    const auto ds = detect_restarts(shifted, p, 2);
    for (std::size_t t = 2; t + 2 < shifted.size(); ++t) CHECK(ds.posterior[t] == d.posterior[t + k]);
    std::vector<double> moved(d.posterior.begin() + k, d.posterior.end());
    moved[0] = moved[1] = std::nan("");
    auto expect = select_restarts(moved, 6);
    CHECK(select_restarts(ds.posterior, 6) == expect);
}

TEST_CASE("reconstruction") {
    ModelParams p;
    p.D = 0.16;
    p.nu = 0.004;
    p.M = 63;
    p.mixture = InverseGamma{5.5, 0.14};
    const auto path = sample_returns(p, 20000, {8, 0});

    std::vector<std::size_t> every(path.x.size());
    for (std::size_t t = 0; t < every.size(); ++t) every[t] = t;
    const auto all = reconstruct_endogenous(path.x, every, p.D);
    for (std::size_t t = 0; t < every.size(); ++t) {
        CHECK(all.i[t] == 1);
        CHECK(all.y[t] == path.x[t]);
    }

    const auto flat = reconstruct_endogenous(path.x, {100, 200}, 0.5);
    for (std::size_t t = 0; t < path.x.size(); ++t) CHECK(flat.y[t] == path.x[t]);

    const auto truth = restart_times_of(path.i);
    REQUIRE(!truth.empty());
    const auto rec = reconstruct_endogenous(path.x, truth, p.D);
    std::size_t mismatches = 0;
    for (std::size_t t = truth.front(); t < path.x.size(); ++t) {
        mismatches += rec.i[t] != path.i[t];
        if (std::abs(rec.y[t] - path.y[t]) > 1e-14 * std::abs(path.y[t])) ++mismatches;
    }
    CHECK(mismatches == 0);
    // i resets exactly at the restart set and counts up elsewhere
    for (std::size_t t = 1; t < rec.i.size(); ++t) {
        const bool reset = std::binary_search(truth.begin(), truth.end(), t);
        CHECK(rec.i[t] == (reset ? 1 : rec.i[t - 1] + 1));
    }
    CHECK_THROWS_AS(reconstruct_endogenous(path.x, {5, 5}, p.D), PreconditionViolation);
    CHECK_THROWS_AS(reconstruct_endogenous(path.x, {path.x.size()}, p.D), PreconditionViolation);
}

TEST_CASE("long-memory volatility samples") {
    std::vector<double> y(100);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = (k % 3 ? 1.0 : -1.0) * 0.25;
    const auto s = longmem_vol_samples(y, 10, 20);
    CHECK(s.size() == 91);
    for (double v : s) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
    CHECK_THROWS_AS(longmem_vol_samples(y, 22, 20), PreconditionViolation);
    CHECK_THROWS_AS(longmem_vol_samples(y, 0, 20), PreconditionViolation);

    std::vector<double> z{1.0, 2.0, 2.0, 0.0};
    const auto sz = longmem_vol_samples(z, 2, 5);
    CHECK(sz[0] == doctest::Approx(std::sqrt(2.5)));
    CHECK(sz[1] == doctest::Approx(2.0));
    CHECK(sz[2] == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("recovery scoring") {
    const std::vector<std::size_t> truth{10, 50, 90, 130};
    CHECK(restart_recovery({10, 52, 95}, truth, 0) == 0.25);
    CHECK(restart_recovery({10, 52, 95}, truth, 2) == 0.5);
    CHECK(restart_recovery({}, truth, 2) == 0.0);
    CHECK(restart_recovery({3}, {}, 2) == 1.0);
    CHECK(restart_times_of({3, 1, 2, 1, 1}) == std::vector<std::size_t>{1, 3, 4});
}
