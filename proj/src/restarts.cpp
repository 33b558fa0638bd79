#include "msarch/restarts.hpp"

#include "msarch/errors.hpp"
#include "msarch/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace msarch {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// k log p, with 0 log 0 = 0
double times_log(int k, double p) { return k == 0 ? 0.0 : k * std::log(p); }

}  // namespace

WindowScanner::WindowScanner(const ModelParams& params, int tau, double eps) : params_(params), tau_(tau) {
    params.validate();
    if (tau < 0) throw PreconditionViolation("tau must be >= 0");
    n_ = 2 * tau + 1;
    if (n_ > params.M + 1)
        throw WindowTooWide("window 2 tau + 1 = " + std::to_string(n_) + " exceeds M + 1 = " +
                            std::to_string(params.M + 1));
    if (n_ > 25) throw WindowTooWide("more than 2^24 restart patterns per window");
    i_max_ = params.nu >= 1.0 ? 1 : std::max<std::int64_t>(1, geometric_truncation(params.nu, eps));
    const std::int64_t top = i_max_ + n_;
    inv_a2_.resize(top + 1);
    log_a_.resize(top + 1);
    for (std::int64_t i = 1; i <= top; ++i) {
        const double a2 = rescale_factor_sq(i, params.D);
        inv_a2_[i] = 1.0 / a2;
        log_a_[i] = 0.5 * std::log(a2);
    }
    const std::size_t masks = std::size_t{1} << (n_ - 1);
    pattern_log_prob_.resize(masks);
    first_restart_.resize(masks);
    for (std::size_t m = 0; m < masks; ++m) {
        const int r = std::popcount(m);
        pattern_log_prob_[m] = times_log(r, params.nu) + times_log(n_ - 1 - r, 1.0 - params.nu);
        first_restart_[m] = m == 0 ? n_ : std::countr_zero(m) + 1;
    }
}

WindowPosterior WindowScanner::operator()(std::span<const double> w) const {
    if (static_cast<int>(w.size()) != n_) throw PreconditionViolation("window length must be 2 tau + 1");
    const std::size_t masks = pattern_log_prob_.size();
    const double n = n_;

    double log_norm;
    double shape = 0.0, inv_scale2;
    const auto* ig = std::get_if<InverseGamma>(&params_.mixture);
    if (ig) {
        log_norm = std::lgamma(0.5 * (ig->alpha + n)) - 0.5 * n * std::log(std::numbers::pi) -
                   n * std::log(ig->beta) - std::lgamma(0.5 * ig->alpha);
        shape = 0.5 * (ig->alpha + n);
        inv_scale2 = 1.0 / (ig->beta * ig->beta);
    } else {
        const double s = std::get<PointVol>(params_.mixture).sigma0;
        log_norm = -0.5 * n * std::log(2.0 * std::numbers::pi * s * s);
        inv_scale2 = 0.5 / (s * s);
    }
    auto log_phi = [&](double Q) { return ig ? log_norm - shape * std::log1p(Q * inv_scale2) : log_norm - Q * inv_scale2; };

    std::vector<double> w2(n_);
    for (int k = 0; k < n_; ++k) w2[k] = w[k] * w[k];

    // part of the window from the first restart on: indices fixed by the pattern
    std::vector<double> q_suffix(masks), l_suffix(masks);
    std::vector<char> centre_restart(masks);
    for (std::size_t m = 0; m < masks; ++m) {
        double q = 0.0, l = 0.0;
        std::int64_t idx = 0;
        for (int k = first_restart_[m]; k < n_; ++k) {
            idx = (m >> (k - 1)) & 1 ? 1 : idx + 1;
            q += w2[k] * inv_a2_[idx];
            l += log_a_[idx];
        }
        q_suffix[m] = q;
        l_suffix[m] = l;
        centre_restart[m] = tau_ >= 1 && ((m >> (tau_ - 1)) & 1);
    }

    const double log_nu = std::log(params_.nu);
    const double log_keep = params_.nu < 1.0 ? std::log1p(-params_.nu) : 0.0;
    std::vector<double> q_pre(n_ + 1), l_pre(n_ + 1);
    // running log-sum-exp
    double top = -std::numeric_limits<double>::infinity(), total = 0.0, hit = 0.0;
    for (std::int64_t i = 1; i <= i_max_; ++i) {
        q_pre[0] = l_pre[0] = 0.0;
        for (int k = 0; k < n_; ++k) {
            q_pre[k + 1] = q_pre[k] + w2[k] * inv_a2_[i + k];
            l_pre[k + 1] = l_pre[k] + log_a_[i + k];
        }
        const double log_start = log_nu + static_cast<double>(i - 1) * log_keep;
        for (std::size_t m = 0; m < masks; ++m) {
            const int f = first_restart_[m];
            const double v = log_start + pattern_log_prob_[m] + log_phi(q_pre[f] + q_suffix[m]) - l_pre[f] - l_suffix[m];
            if (v == -std::numeric_limits<double>::infinity()) continue;
            if (v > top) {
                const double shrink = std::exp(top - v);
                total *= shrink;
                hit *= shrink;
                top = v;
            }
            const double e = std::exp(v - top);
            total += e;
            // the centre sits in the prefix only for tau = 0, as the first step
            if (centre_restart[m] || (tau_ == 0 && i == 1)) hit += e;
        }
    }
    return {std::clamp(hit / total, 0.0, 1.0), top + std::log(total)};
}

double restart_posterior(std::span<const double> x, std::size_t t, int tau, const ModelParams& params) {
    const WindowScanner scan(params, tau);
    if (t < static_cast<std::size_t>(tau) || t + tau >= x.size())
        throw PreconditionViolation("window around t leaves the series");
    return scan(x.subspan(t - tau, 2 * tau + 1)).restart_prob;
}

std::size_t restart_budget(double nu, std::size_t T) {
    const double want = nu * static_cast<double>(T);
    if (want < 1.0) return 0;
    return static_cast<std::size_t>(std::ceil(want - 1e-9 * want));
}

std::vector<std::size_t> select_restarts(const std::vector<double>& p, std::size_t count) {
    const std::size_t T = p.size();
    auto value = [&](std::size_t t) { return std::isnan(p[t]) ? -std::numeric_limits<double>::infinity() : p[t]; };
    std::vector<std::size_t> peaks, rest;
    for (std::size_t t = 0; t < T; ++t) {
        if (std::isnan(p[t])) continue;
        const double left = t > 0 ? value(t - 1) : -std::numeric_limits<double>::infinity();
        const double right = t + 1 < T ? value(t + 1) : -std::numeric_limits<double>::infinity();
        (left < p[t] && p[t] >= right ? peaks : rest).push_back(t);
    }
    auto by_height = [&](std::size_t a, std::size_t b) { return p[a] > p[b] || (p[a] == p[b] && a < b); };
    std::sort(peaks.begin(), peaks.end(), by_height);
    std::vector<std::size_t> chosen(peaks.begin(), peaks.begin() + std::min(count, peaks.size()));
    if (chosen.size() < count) {
        std::sort(rest.begin(), rest.end(), by_height);
        for (std::size_t k = 0; k < rest.size() && chosen.size() < count; ++k) chosen.push_back(rest[k]);
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
}

RestartDiagnostics detect_restarts(std::span<const double> x, const ModelParams& params, int tau) {
    const WindowScanner scan(params, tau);
    const std::size_t T = x.size();
    RestartDiagnostics out;
    out.tau = tau;
    out.posterior.assign(T, kNaN);
    if (T >= static_cast<std::size_t>(2 * tau + 1)) {
        const std::size_t first = tau, last = T - 1 - tau;
        const std::size_t span_len = last - first + 1, block = 256;
        parallel_for((span_len + block - 1) / block, [&](std::size_t b) {
            for (std::size_t t = first + b * block; t <= last && t < first + (b + 1) * block; ++t)
                out.posterior[t] = scan(x.subspan(t - tau, 2 * tau + 1)).restart_prob;
        });
    }
    out.restart_times = select_restarts(out.posterior, restart_budget(params.nu, T));
    out.threshold = kNaN;
    for (std::size_t t : out.restart_times)
        out.threshold = std::isnan(out.threshold) ? out.posterior[t] : std::min(out.threshold, out.posterior[t]);
    auto rec = reconstruct_endogenous(x, out.restart_times, params.D);
    out.i_path = std::move(rec.i);
    out.y_path = std::move(rec.y);
    return out;
}

Reconstruction reconstruct_endogenous(std::span<const double> x, const std::vector<std::size_t>& restart_times,
                                      double D) {
    if (!(D > 0.0 && D <= 0.5)) throw PreconditionViolation("D must lie in (0, 1/2]");
    for (std::size_t k = 0; k < restart_times.size(); ++k) {
        if (restart_times[k] >= x.size()) throw PreconditionViolation("restart time outside the series");
        if (k > 0 && restart_times[k] <= restart_times[k - 1])
            throw PreconditionViolation("restart times must be strictly increasing");
    }
    Reconstruction r;
    r.i.resize(x.size());
    r.y.resize(x.size());
    std::size_t next = 0;
    std::int64_t i = 0;
    for (std::size_t t = 0; t < x.size(); ++t) {
        const bool reset = next < restart_times.size() && restart_times[next] == t;
        if (reset) ++next;
        i = (t == 0 || reset) ? 1 : i + 1;
        r.i[t] = i;
        r.y[t] = x[t] / rescale_factor(i, D);
    }
    return r;
}

std::vector<double> longmem_vol_samples(std::span<const double> y, int window, int M) {
    if (window < 1 || window > M + 1) throw PreconditionViolation("window must satisfy 1 <= t <= M + 1");
    if (y.size() < static_cast<std::size_t>(window)) throw PreconditionViolation("series shorter than the window");
    std::vector<long double> P(y.size() + 1, 0.0L);
    for (std::size_t k = 0; k < y.size(); ++k) P[k + 1] = P[k] + static_cast<long double>(y[k]) * y[k];
    std::vector<double> s(y.size() - window + 1);
    for (std::size_t n = 0; n < s.size(); ++n)
        s[n] = static_cast<double>(std::sqrt(std::max(0.0L, P[n + window] - P[n]) / window));
    return s;
}

double restart_recovery(const std::vector<std::size_t>& detected, const std::vector<std::size_t>& truth,
                        std::size_t tolerance) {
    if (truth.empty()) return 1.0;
    std::vector<std::size_t> d(detected);
    std::sort(d.begin(), d.end());
    std::size_t found = 0;
    for (std::size_t t : truth) {
        auto it = std::lower_bound(d.begin(), d.end(), t >= tolerance ? t - tolerance : 0);
        found += it != d.end() && *it <= t + tolerance;
    }
    return static_cast<double>(found) / static_cast<double>(truth.size());
}

std::vector<std::size_t> restart_times_of(const std::vector<std::int64_t>& i_path) {
    std::vector<std::size_t> t;
    for (std::size_t k = 0; k < i_path.size(); ++k)
        if (i_path[k] == 1) t.push_back(k);
    return t;
}

}  // namespace msarch
