#include "msarch/empirics.hpp"

#include "msarch/errors.hpp"
#include "msarch/stats.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace msarch {

namespace {

double abs_power(double v, double q) {
    const double a = std::abs(v);
    if (q == 1.0) return a;
    if (q == 2.0) return a * a;
    return std::pow(a, q);
}

std::vector<long double> prefix_sums(std::span<const double> x) {
    std::vector<long double> p(x.size() + 1, 0.0L);
    for (std::size_t k = 0; k < x.size(); ++k) p[k + 1] = p[k] + x[k];
    return p;
}

}  // namespace

ReturnSeries log_returns(std::span<const double> prices) {
    if (prices.size() < 2) throw PreconditionViolation("need at least two prices");
    for (std::size_t k = 0; k < prices.size(); ++k)
        if (!(prices[k] > 0.0) || !std::isfinite(prices[k]))
            throw NonPositivePrice("price at position " + std::to_string(k + 1) + " is not positive");
    ReturnSeries out;
    out.values.resize(prices.size() - 1);
    long double sum = 0.0L;
    for (std::size_t k = 1; k < prices.size(); ++k) {
        out.values[k - 1] = std::log(prices[k]) - std::log(prices[k - 1]);
        sum += out.values[k - 1];
    }
    const double drift = static_cast<double>(sum / static_cast<long double>(out.values.size()));
    for (double& v : out.values) v -= drift;
    out.mean_removed = true;
    return out;
}

MomentCurve empirical_moment_curve(std::span<const double> x, double q, int t_max) {
    const std::size_t T = x.size();
    if (t_max < 1 || static_cast<std::size_t>(t_max) > T) throw PreconditionViolation("need 1 <= t <= T");
    const auto P = prefix_sums(x);
    MomentCurve curve;
    curve.q = q;
    curve.provenance = Provenance::Empirical;
    double base = 0.0;
    for (int t = 1; t <= t_max; ++t) {
        const std::size_t windows = T + 1 - static_cast<std::size_t>(t);
        long double acc = 0.0L;
        for (std::size_t n = 0; n < windows; ++n) acc += abs_power(static_cast<double>(P[n + t] - P[n]), q);
        const double M = static_cast<double>(acc / static_cast<long double>(windows));
        if (t == 1) {
            if (!(M > 0.0)) throw ZeroVariance("all returns are zero");
            base = M;
        }
        curve.ts.push_back(t);
        curve.values.push_back(t == 1 ? 1.0 : M / base);
    }
    return curve;
}

double empirical_moment_ratio(std::span<const double> x, double q, int t) {
    if (t < 1 || static_cast<std::size_t>(t) > x.size()) throw PreconditionViolation("need 1 <= t <= T");
    if (t == 1) return 1.0;
    const auto P = prefix_sums(x);
    auto M = [&](int w) {
        const std::size_t windows = x.size() + 1 - static_cast<std::size_t>(w);
        long double acc = 0.0L;
        for (std::size_t n = 0; n < windows; ++n) acc += abs_power(static_cast<double>(P[n + w] - P[n]), q);
        return static_cast<double>(acc / static_cast<long double>(windows));
    };
    const double base = M(1);
    if (!(base > 0.0)) throw ZeroVariance("all returns are zero");
    return M(t) / base;
}

AcfCurve empirical_acf_curve(std::span<const double> x, double q, int t_max) {
    const std::size_t T = x.size();
    if (t_max < 1 || static_cast<std::size_t>(t_max) > T) throw PreconditionViolation("need 1 <= t <= T");
    std::vector<double> z(T);
    long double mean = 0.0L;
    for (std::size_t n = 0; n < T; ++n) mean += z[n] = abs_power(x[n], q);
    mean /= static_cast<long double>(T);
    long double c0 = 0.0L;
    for (std::size_t n = 0; n < T; ++n) {
        z[n] = static_cast<double>(z[n] - mean);
        c0 += static_cast<long double>(z[n]) * z[n];
    }
    c0 /= static_cast<long double>(T);
    if (!(c0 > 1e-300L)) throw ZeroVariance("|x|^q is constant");
    AcfCurve curve;
    curve.q = q;
    curve.provenance = Provenance::Empirical;
    for (int t = 1; t <= t_max; ++t) {
        const std::size_t lag = static_cast<std::size_t>(t - 1);
        long double c = 0.0L;
        for (std::size_t n = 0; n + lag < T; ++n) c += static_cast<long double>(z[n]) * z[n + lag];
        c /= static_cast<long double>(T - lag);
        curve.ts.push_back(t);
        curve.values.push_back(t == 1 ? 1.0 : static_cast<double>(c / c0));
    }
    return curve;
}

double empirical_acf(std::span<const double> x, double q, int t) {
    if (t < 1 || static_cast<std::size_t>(t) > x.size()) throw PreconditionViolation("need 1 <= t <= T");
    const AcfCurve c = empirical_acf_curve(x, q, t);
    return c.values.back();
}

ScalingFit empirical_hurst(std::span<const double> x, double q, int window_max) {
    if (window_max < 2) throw PreconditionViolation("window must contain t = 2");
    if (static_cast<std::size_t>(window_max) * 10 > x.size())
        throw PreconditionViolation("window " + std::to_string(window_max) + " exceeds T/10");
    return hurst_fit(empirical_moment_curve(x, q, window_max), window_max);
}

MugShotGrid mug_shot(std::span<const double> x, const std::vector<int>& t_h_grid, const std::vector<int>& t_r_grid) {
    if (t_h_grid.empty() || t_r_grid.empty()) throw PreconditionViolation("empty horizon grid");
    const int h_max = *std::max_element(t_h_grid.begin(), t_h_grid.end());
    const int r_max = *std::max_element(t_r_grid.begin(), t_r_grid.end());
    if (*std::min_element(t_h_grid.begin(), t_h_grid.end()) < 1 ||
        *std::min_element(t_r_grid.begin(), t_r_grid.end()) < 1)
        throw PreconditionViolation("horizons must be >= 1");
    if (static_cast<std::size_t>(h_max + r_max) > x.size())
        throw PreconditionViolation("max(t_h) + max(t_r) exceeds the series length");

    // quad precision keeps short-window differences of the running sum exact
    std::vector<__float128> Q(x.size() + 1, 0);
    for (std::size_t k = 0; k < x.size(); ++k) Q[k + 1] = Q[k] + static_cast<__float128>(x[k]) * x[k];
    auto rms = [&](std::size_t from, int width) {
        const auto s = static_cast<long double>(Q[from + width] - Q[from]);
        return std::sqrt(std::max(0.0L, s) / width);
    };

    MugShotGrid grid;
    grid.t_h = t_h_grid;
    grid.t_r = t_r_grid;
    grid.values.reserve(t_h_grid.size() * t_r_grid.size());
    std::vector<long double> hv, rv;
    for (int th : t_h_grid)
        for (int tr : t_r_grid) {
            const std::size_t N = x.size() - static_cast<std::size_t>(th + tr) + 1;
            hv.resize(N);
            rv.resize(N);
            long double mh = 0.0L, mr = 0.0L;
            for (std::size_t n = 0; n < N; ++n) {
                mh += hv[n] = rms(n, th);
                mr += rv[n] = rms(n + th, tr);
            }
            mh /= N;
            mr /= N;
            long double shr = 0.0L, shh = 0.0L, srr = 0.0L;
            for (std::size_t n = 0; n < N; ++n) {
                const long double a = hv[n] - mh, b = rv[n] - mr;
                shr += a * b;
                shh += a * a;
                srr += b * b;
            }
            const long double tiny = 1e-24L * N;
            if (!(shh > tiny * (mh * mh + 1e-300L)) || !(srr > tiny * (mr * mr + 1e-300L)))
                grid.values.push_back(std::nullopt);
            else
                grid.values.push_back(static_cast<double>(shr / std::sqrt(shh * srr)));
        }
    return grid;
}

double mug_shot_asymmetry(const MugShotGrid& grid) {
    double worst = 0.0;
    for (std::size_t h = 0; h < grid.t_h.size(); ++h)
        for (std::size_t r = 0; r < grid.t_r.size(); ++r) {
            // locate the transposed pair
            const auto hh = std::find(grid.t_h.begin(), grid.t_h.end(), grid.t_r[r]);
            const auto rr = std::find(grid.t_r.begin(), grid.t_r.end(), grid.t_h[h]);
            if (hh == grid.t_h.end() || rr == grid.t_r.end()) continue;
            const auto a = grid.at(h, r);
            const auto b = grid.at(static_cast<std::size_t>(hh - grid.t_h.begin()),
                                   static_cast<std::size_t>(rr - grid.t_r.begin()));
            if (a && b) worst = std::max(worst, std::abs(*a - *b));
        }
    return worst;
}

bool SignMagnitudeReport::magnitude_independent() const {
    return std::all_of(cross_p.begin(), cross_p.end(), [&](double p) { return p >= level; });
}

SignMagnitudeReport sign_magnitude_diagnostics(std::span<const double> y, double level) {
    if (y.size() < 100) throw PreconditionViolation("sign diagnostics need at least 100 values");
    SignMagnitudeReport rep;
    rep.level = level;
    std::vector<int> signs;
    signs.reserve(y.size());
    for (double v : y) {
        if (v > 0.0) {
            rep.positives++;
            signs.push_back(1);
        } else if (v < 0.0) {
            rep.negatives++;
            signs.push_back(-1);
        }
    }
    rep.n = signs.size();
    if (rep.n == 0) throw ZeroVariance("all values are zero");

    const boost::math::binomial_distribution<double> coin(static_cast<double>(rep.n), 0.5);
    const double k = static_cast<double>(rep.positives);
    const double lower = boost::math::cdf(coin, k);
    const double upper = k > 0 ? boost::math::cdf(boost::math::complement(coin, k - 1.0)) : 1.0;
    rep.binomial_p = std::min(1.0, 2.0 * std::min(lower, upper));

    rep.runs = 1;
    for (std::size_t t = 1; t < signs.size(); ++t)
        if (signs[t] != signs[t - 1]) rep.runs++;
    const double n1 = static_cast<double>(rep.positives), n2 = static_cast<double>(rep.negatives);
    const double n = n1 + n2;
    if (n1 > 0 && n2 > 0) {
        const double mu = 2.0 * n1 * n2 / n + 1.0;
        const double var = (mu - 1.0) * (mu - 2.0) / (n - 1.0);
        rep.runs_z = var > 0.0 ? (static_cast<double>(rep.runs) - mu) / std::sqrt(var) : 0.0;
        rep.runs_p = normal_two_sided_p(rep.runs_z);
    }

    for (std::size_t lag = 0; lag <= 5; ++lag) {
        const std::size_t N = y.size() - lag;
        long double ms = 0.0L, mm = 0.0L;
        for (std::size_t t = 0; t < N; ++t) {
            ms += (y[t] > 0.0) - (y[t] < 0.0);
            mm += std::abs(y[t + lag]);
        }
        ms /= N;
        mm /= N;
        long double sab = 0.0L, saa = 0.0L, sbb = 0.0L;
        for (std::size_t t = 0; t < N; ++t) {
            const long double a = ((y[t] > 0.0) - (y[t] < 0.0)) - ms;
            const long double b = std::abs(y[t + lag]) - mm;
            sab += a * b;
            saa += a * a;
            sbb += b * b;
        }
        const double r = saa > 0 && sbb > 0 ? static_cast<double>(sab / std::sqrt(saa * sbb)) : 0.0;
        rep.cross_corr.push_back(r);
        rep.cross_p.push_back(normal_two_sided_p(r * std::sqrt(static_cast<double>(N))));
    }
    return rep;
}

}  // namespace msarch
