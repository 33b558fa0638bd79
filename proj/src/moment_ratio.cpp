// Short-memory moment ratio m_q(t) = E[(a_{I_1}^2 + ... + a_{I_t}^2)^{q/2}] / E[a_{I_1}^q].
//
// Let S_t be the sum inside the expectation and p = q/2. Conditioning on the
// first restart inside the window splits S_t into
//
//   S_t = G(i, L) + R_{t-L},   G(i, L) = (i+L-1)^{2D} - (i-1)^{2D},
//
// where i is the initial index (stationary law), L the length of the leading
// run and R_n the sum accumulated by a chain started at a restart and run for n
// steps. R_n does not depend on i. For every n the map g -> F_n(g) = E[(g+R_n)^p]
// is analytic on the range of G(., L) (its only singularities lie at g <= -1),
// so it is replaced by a Chebyshev interpolant and the sum over i collapses to
// Chebyshev moments of G(., L) that are shared by all n. F_n at the Chebyshev
// nodes is exact for integer p and otherwise comes from the positive-term
// Laplace representation
//
//   s^f = f / Gamma(1-f) * int_0^inf (1 - e^{-us}) u^{-1-f} du,   0 < f < 1,
//
// integrated with the trapezoid rule in log u, where the chain expectations
// E[R^j (1 - e^{-uR})] come from a forward recursion over the chain states.

#include "msarch/errors.hpp"
#include "msarch/model.hpp"
#include "msarch/stationary_series.hpp"
#include "msarch/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <numbers>
#include <vector>

namespace msarch {

namespace {

constexpr int kMaxChebyshev = 700;
constexpr int kMaxWindow = 2048;

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

struct ChainState {
    int n0 = 0;        // integer part of the power (or 0 in the negative branch)
    int n_max = 0;     // longest post-restart run needed
    std::vector<double> asq;  // a_c^2 for c = 0..n_max + 1 (index 0 unused)
};

std::vector<double> binomials(int n) {
    std::vector<double> c((n + 1) * (n + 1), 0.0);
    for (int k = 0; k <= n; ++k) {
        c[k * (n + 1)] = 1.0;
        for (int j = 1; j <= k; ++j)
            c[k * (n + 1) + j] = c[(k - 1) * (n + 1) + j - 1] + (j <= k - 1 ? c[(k - 1) * (n + 1) + j] : 0.0);
    }
    return c;
}

// Adds the effect of appending w to the running sum: v'_k = sum_j C(k,j) w^{k-j} v_j.
void shift_moments(const double* in, double* out, double w, int n0, const std::vector<double>& binom) {
    for (int k = 0; k <= n0; ++k) {
        double acc = 0.0;
        double wp = 1.0;
        for (int j = k; j >= 0; --j) {
            acc += binom[k * (n0 + 1) + j] * wp * in[j];
            wp *= w;
        }
        out[k] = acc;
    }
}

// E[R_n^j] for n = 1..n_max, j = 0..n0; layout [n][j].
std::vector<double> chain_power_moments(const ChainState& cs, double nu, const std::vector<double>& binom) {
    const int width = cs.n0 + 1;
    std::vector<double> totals((cs.n_max + 1) * width, 0.0);
    std::vector<double> cur((cs.n_max + 2) * width, 0.0), nxt((cs.n_max + 2) * width, 0.0);
    std::vector<double> tmp(width), sum(width);
    // step 1: restart, R = a_1^2 = 1
    for (int j = 0; j < width; ++j) cur[1 * width + j] = 1.0;
    for (int n = 1; n <= cs.n_max; ++n) {
        for (int j = 0; j < width; ++j) {
            double s = 0.0;
            for (int c = 1; c <= n; ++c) s += cur[c * width + j];
            totals[n * width + j] = s;
        }
        if (n == cs.n_max) break;
        std::fill(nxt.begin(), nxt.end(), 0.0);
        std::fill(sum.begin(), sum.end(), 0.0);
        for (int c = 1; c <= n; ++c) {
            for (int j = 0; j < width; ++j) sum[j] += cur[c * width + j];
            shift_moments(&cur[c * width], tmp.data(), cs.asq[c + 1], cs.n0, binom);
            for (int j = 0; j < width; ++j) nxt[(c + 1) * width + j] += (1.0 - nu) * tmp[j];
        }
        shift_moments(sum.data(), tmp.data(), 1.0, cs.n0, binom);
        for (int j = 0; j < width; ++j) nxt[1 * width + j] += nu * tmp[j];
        std::swap(cur, nxt);
    }
    return totals;
}

// For one u: P_j(n) = E[R_n^j e^{-uR_n}], Q_j(n) = E[R_n^j (1 - e^{-uR_n})]; layout [n][j].
void chain_laplace(const ChainState& cs, double nu, double u, const std::vector<double>& binom,
                   std::vector<double>& P, std::vector<double>& Q) {
    const int width = cs.n0 + 1;
    const int states = cs.n_max + 2;
    P.assign((cs.n_max + 1) * width, 0.0);
    Q.assign((cs.n_max + 1) * width, 0.0);
    std::vector<double> curP(states * width, 0.0), curQ(states * width, 0.0);
    std::vector<double> nxtP(states * width), nxtQ(states * width);
    std::vector<double> decay(states), gain(states);
    for (int c = 1; c < states; ++c) {
        decay[c] = std::exp(-u * cs.asq[c]);
        gain[c] = -std::expm1(-u * cs.asq[c]);
    }
    std::vector<double> tp(width), tq(width), sp(width), sq(width), mixed(width);
    for (int j = 0; j < width; ++j) {
        curP[width + j] = decay[1];
        curQ[width + j] = gain[1];
    }
    for (int n = 1; n <= cs.n_max; ++n) {
        for (int j = 0; j < width; ++j) {
            double a = 0.0, b = 0.0;
            for (int c = 1; c <= n; ++c) {
                a += curP[c * width + j];
                b += curQ[c * width + j];
            }
            P[n * width + j] = a;
            Q[n * width + j] = b;
        }
        if (n == cs.n_max) break;
        std::fill(nxtP.begin(), nxtP.end(), 0.0);
        std::fill(nxtQ.begin(), nxtQ.end(), 0.0);
        std::fill(sp.begin(), sp.end(), 0.0);
        std::fill(sq.begin(), sq.end(), 0.0);
        auto append = [&](const double* inP, const double* inQ, int target, double prob) {
            // P' = e^{-uw} shift(P),  Q' = shift(Q + (1 - e^{-uw}) P)
            shift_moments(inP, tp.data(), cs.asq[target], cs.n0, binom);
            for (int j = 0; j < width; ++j) mixed[j] = inQ[j] + gain[target] * inP[j];
            shift_moments(mixed.data(), tq.data(), cs.asq[target], cs.n0, binom);
            for (int j = 0; j < width; ++j) {
                nxtP[target * width + j] += prob * decay[target] * tp[j];
                nxtQ[target * width + j] += prob * tq[j];
            }
        };
        for (int c = 1; c <= n; ++c) {
            for (int j = 0; j < width; ++j) {
                sp[j] += curP[c * width + j];
                sq[j] += curQ[c * width + j];
            }
            append(&curP[c * width], &curQ[c * width], c + 1, 1.0 - nu);
        }
        append(sp.data(), sq.data(), 1, nu);
        std::swap(curP, nxtP);
        std::swap(curQ, nxtQ);
    }
}

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    int K = 1;
    std::vector<double> nodes;  // g values at the Chebyshev points
};

int chebyshev_degree(double lo, double hi, double singularity, double log_tol) {
    const double half = 0.5 * (hi - lo);
    if (!(half > 0.0)) return 1;
    const double mid = 0.5 * (hi + lo);
    const double xs = std::abs(singularity - mid) / half;
    const double rho = xs + std::sqrt(std::max(0.0, xs * xs - 1.0));
    if (!(rho > 1.0)) return kMaxChebyshev;
    const double need = (log_tol + std::log(2.0 / (1.0 - 1.0 / rho)) + 3.0) / std::log(rho);
    return std::clamp(static_cast<int>(std::ceil(need)) + 2, 2, kMaxChebyshev);
}

struct Numerator {
    std::vector<double> value;  // E[S_t^p], index t (0 unused)
    std::vector<double> error;
};

Numerator numerator_curve(double p, int t_max, double D, double nu, double abs_tol, double log_tol) {
    const bool negative = p < 0.0;
    const int n0 = negative ? 0 : static_cast<int>(std::floor(p));
    const double f = negative ? 0.0 : p - n0;
    const bool polynomial = !negative && f == 0.0;

    // Envelope of S_t^p (and of E[(G + R)^p]) for the truncation of the initial index.
    PowerEnvelope env{1.0, 0.0};
    const double tm = static_cast<double>(t_max);
    if (!negative) {
        if (D <= 0.5)
            env = {std::pow(tm, p), 0.0};
        else
            env = {std::pow((2.0 * D + 1.0) * std::pow(tm, 2.0 * D), p), (2.0 * D - 1.0) * p};
    } else if (D < 0.5) {
        env = {std::max(1.0, std::pow(2.0 * D, p)), (2.0 * D - 1.0) * p};
    }
    if (env.exponent > 60.0) throw BudgetExceeded("moment ratio series grows too fast");
    const std::int64_t i_max = stationary_truncation(nu, 0.25 * abs_tol, env);
    const double trunc_bound = stationary_tail_bound(nu, i_max, env);

    // Chebyshev intervals for G(., L); G is monotone in the initial index.
    std::vector<Interval> iv(t_max + 1);
    const int L_cheb = t_max - 1;
    for (int L = 1; L <= L_cheb; ++L) {
        const double g1 = rescale_block_sq(1, L, D);
        const double gn = rescale_block_sq(i_max, L, D);
        auto& I = iv[L];
        I.lo = std::min(g1, gn);
        I.hi = std::max(g1, gn);
        // nearest singularity of F_n over n: g = -min_n R_n >= ... >= -1
        I.K = polynomial ? n0 + 1 : chebyshev_degree(I.lo, I.hi, -1.0, log_tol);
        I.nodes.resize(I.K);
        const double mid = 0.5 * (I.hi + I.lo), half = 0.5 * (I.hi - I.lo);
        for (int k = 0; k < I.K; ++k)
            I.nodes[k] = mid + half * std::cos(std::numbers::pi * (k + 0.5) / I.K);
    }

    // One pass over the initial index: the no-restart term and Chebyshev moments.
    std::vector<double> leading(t_max + 1, 0.0);
    std::vector<std::vector<double>> mu(t_max + 1);
    for (int L = 1; L <= L_cheb; ++L) mu[L].assign(iv[L].K, 0.0);
    // initial indices are processed in blocks so the Chebyshev recurrences of
    // neighbouring indices run side by side
    constexpr int kBlock = 8;
    std::vector<double> window(kBlock + t_max, 0.0);  // a^2 of i0 .. i0 + kBlock + t_max - 1
    for (int k = 0; k < kBlock + t_max; ++k) window[k] = rescale_factor_sq(1 + k, D);
    const double log_keep = nu < 1.0 ? std::log1p(-nu) : 0.0;
    auto power = [p](double g) {
        if (p == 0.5) return std::sqrt(g);
        if (p == 1.0) return g;
        return std::pow(g, p);
    };
    double g[kBlock], w[kBlock], x[kBlock], t0[kBlock], t1[kBlock];
    for (std::int64_t i0 = 1; i0 <= i_max; i0 += kBlock) {
        const int width_b = static_cast<int>(std::min<std::int64_t>(kBlock, i_max - i0 + 1));
        for (int b = 0; b < kBlock; ++b) {
            g[b] = 0.0;
            w[b] = b < width_b ? nu * std::exp(static_cast<double>(i0 - 1 + b) * log_keep) : 0.0;
        }
        for (int L = 1; L <= t_max; ++L) {
            double lead = 0.0;
            for (int b = 0; b < kBlock; ++b) {
                g[b] += window[b + L - 1];
                lead += w[b] * power(g[b]);
            }
            leading[L] += lead;
            if (L > L_cheb) break;
            const auto& I = iv[L];
            auto& m = mu[L];
            const double half = 0.5 * (I.hi - I.lo);
            const double mid = 0.5 * (I.hi + I.lo);
            double s0 = 0.0, s1 = 0.0;
            for (int b = 0; b < kBlock; ++b) {
                x[b] = half > 0.0 ? std::clamp((g[b] - mid) / half, -1.0, 1.0) : 0.0;
                t0[b] = 1.0;
                t1[b] = x[b];
                s0 += w[b];
                s1 += w[b] * x[b];
            }
            m[0] += s0;
            if (I.K > 1) m[1] += s1;
            for (int k = 2; k < I.K; ++k) {
                double acc = 0.0;
                for (int b = 0; b < kBlock; ++b) {
                    const double t2 = 2.0 * x[b] * t1[b] - t0[b];
                    acc += w[b] * t2;
                    t0[b] = t1[b];
                    t1[b] = t2;
                }
                m[k] += acc;
            }
        }
        std::copy(window.begin() + kBlock, window.end(), window.begin());
        for (int k = t_max; k < kBlock + t_max; ++k) window[k] = rescale_factor_sq(i0 + kBlock + k, D);
    }

    // F_n at the Chebyshev nodes for every (L, n) with L + n <= t_max.
    ChainState cs;
    cs.n0 = n0;
    cs.n_max = std::max(1, t_max - 1);
    cs.asq.resize(cs.n_max + 2);
    for (int c = 1; c <= cs.n_max + 1; ++c) cs.asq[c] = rescale_factor_sq(c, D);
    const auto binom = binomials(n0);
    const int width = n0 + 1;

    // offsets into a flat array F[(L, n, k)]
    std::vector<std::vector<std::size_t>> offset(t_max + 1);
    std::size_t total = 0;
    for (int L = 1; L <= L_cheb; ++L) {
        offset[L].assign(t_max - L + 1, 0);
        for (int n = 1; L + n <= t_max; ++n) {
            offset[L][n] = total;
            total += iv[L].K;
        }
    }
    std::vector<double> F(total, 0.0);
    double quad_error = 0.0;

    const std::vector<double> moments = chain_power_moments(cs, nu, binom);
    if (polynomial) {
        for (int L = 1; L <= L_cheb; ++L)
            for (int n = 1; L + n <= t_max; ++n)
                for (int k = 0; k < iv[L].K; ++k) {
                    const double g = iv[L].nodes[k];
                    double acc = 0.0, gp = 1.0;
                    for (int j = n0; j >= 0; --j) {
                        acc += binom[n0 * width + j] * gp * moments[n * width + j];
                        gp *= g;
                    }
                    F[offset[L][n] + k] = acc;
                }
    } else if (L_cheb >= 1) {
        double s_lo = 1.0, s_hi = 0.0;
        for (int L = 1; L <= L_cheb; ++L) s_hi = std::max(s_hi, iv[L].hi);
        s_hi += std::max(tm, std::pow(tm, 2.0 * D));
        double v_lo, v_hi, prefactor, decay_rate;
        if (negative) {
            v_lo = -std::log(s_hi) - log_tol / (-p);
            v_hi = -std::log(s_lo) + std::log(log_tol + 10.0) + 1.0;
            prefactor = 1.0 / std::tgamma(-p);
            decay_rate = p;  // integrand carries e^{-p v}
        } else {
            v_lo = -std::log(s_hi) - log_tol / (1.0 - f);
            v_hi = -std::log(s_lo) + log_tol / f;
            prefactor = f / std::tgamma(1.0 - f);
            decay_rate = f;
        }
        const double h = 0.9 * std::numbers::pi * std::numbers::pi / log_tol;
        const int count = static_cast<int>(std::ceil((v_hi - v_lo) / h)) + 1;

        // chain transforms per node, laid out [n][j][node]
        std::vector<double> chain((cs.n_max + 1) * width * count, 0.0);
        std::vector<double> u_at(count), w_at(count);
        std::vector<double> P, Q;
        for (int node = 0; node < count; ++node) {
            const double v = v_lo + node * h;
            u_at[node] = std::exp(v);
            w_at[node] = h * prefactor * std::exp(-decay_rate * v);
            chain_laplace(cs, nu, u_at[node], binom, P, Q);
            const auto& src = negative ? P : Q;
            for (int n = 1; n <= cs.n_max; ++n)
                for (int j = 0; j < width; ++j) chain[(n * width + j) * count + node] = src[n * width + j];
        }

        // F_n(g) = sum_j C(n0, j) g^{n0-j} (g^f M_j + int e^{-ug} Q_j), or int e^{-ug} P_0 for p < 0
        std::vector<double> we(count), fine(width), coarse(width);
        double f_scale = 0.0;
        for (int L = 1; L <= L_cheb; ++L) {
            const auto& I = iv[L];
            for (int k = 0; k < I.K; ++k) {
                const double g = I.nodes[k];
                for (int node = 0; node < count; ++node) we[node] = w_at[node] * std::exp(-u_at[node] * g);
                const double gf = negative ? 0.0 : std::pow(g, f);
                for (int n = 1; L + n <= t_max; ++n) {
                    for (int j = 0; j < width; ++j) {
                        const double* row = &chain[(n * width + j) * count];
                        double even = 0.0, odd = 0.0;
                        int node = 0;
                        for (; node + 1 < count; node += 2) {
                            even += we[node] * row[node];
                            odd += we[node + 1] * row[node + 1];
                        }
                        if (node < count) even += we[node] * row[node];
                        fine[j] = even + odd;
                        coarse[j] = 2.0 * even;
                    }
                    double a = 0.0, b = 0.0;
                    if (negative) {
                        a = fine[0];
                        b = coarse[0];
                    } else {
                        double gp = 1.0;
                        for (int j = n0; j >= 0; --j) {
                            const double c = binom[n0 * width + j] * gp;
                            a += c * (gf * moments[n * width + j] + fine[j]);
                            b += c * (gf * moments[n * width + j] + coarse[j]);
                            gp *= g;
                        }
                    }
                    F[offset[L][n] + k] = a;
                    f_scale = std::max(f_scale, std::abs(a));
                    // halving the step squares the error of the trapezoid rule
                    const double diff = std::abs(a - b);
                    quad_error = std::max(quad_error, diff * std::min(1.0, diff / std::max(std::abs(a), 1e-300)));
                }
            }
        }
        quad_error += 2.0 * std::exp(-log_tol) * f_scale;
    }

    // Chebyshev coefficients and the restart-conditioned sums B(L, n).
    std::vector<std::vector<double>> B(t_max + 1), B_err(t_max + 1);
    for (int L = 1; L <= L_cheb; ++L) {
        const int K = iv[L].K;
        B[L].assign(t_max - L + 1, 0.0);
        B_err[L].assign(t_max - L + 1, 0.0);
        std::vector<double> cosines(K * K);
        for (int j = 0; j < K; ++j)
            for (int k = 0; k < K; ++k) cosines[j * K + k] = std::cos(std::numbers::pi * j * (k + 0.5) / K);
        for (int n = 1; L + n <= t_max; ++n) {
            const double* vals = &F[offset[L][n]];
            double b = 0.0, tail = 0.0;
            for (int j = 0; j < K; ++j) {
                double c = 0.0;
                for (int k = 0; k < K; ++k) c += vals[k] * cosines[j * K + k];
                c *= (j == 0 ? 1.0 : 2.0) / K;
                b += c * mu[L][j];
                if (!polynomial && j >= K - 2) tail += std::abs(c);
            }
            B[L][n] = b;
            B_err[L][n] = tail + quad_error;
        }
    }

    Numerator out;
    out.value.assign(t_max + 1, 0.0);
    out.error.assign(t_max + 1, 0.0);
    for (int t = 1; t <= t_max; ++t) {
        const double keep = nu < 1.0 ? std::exp((t - 1) * log_keep) : (t == 1 ? 1.0 : 0.0);
        double value = keep * leading[t];
        double err = trunc_bound;
        for (int L = 1; L < t; ++L) {
            const double w = nu * (nu < 1.0 ? std::exp((L - 1) * log_keep) : (L == 1 ? 1.0 : 0.0));
            value += w * B[L][t - L];
            err += w * B_err[L][t - L];
        }
        out.value[t] = value;
        out.error[t] = err + 2e-16 * std::abs(value) * (t + 4);
    }
    return out;
}

}  // namespace

MomentCurve moment_ratio_curve(double q, int t_max, double D, double nu, double eps) {
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1]");
    if (!(D > 0.0)) throw PreconditionViolation("D must be positive");
    if (!(eps > 0.0)) throw PreconditionViolation("eps must be positive");
    if (t_max < 1) throw PreconditionViolation("t_max must be >= 1");
    if (t_max > kMaxWindow) throw BudgetExceeded("moment ratio window larger than " + std::to_string(kMaxWindow));

    MomentCurve curve;
    curve.q = q;
    curve.provenance = Provenance::Theoretical;
    curve.ts.resize(t_max);
    curve.values.resize(t_max);
    curve.error_bounds.assign(t_max, 0.0);
    for (int t = 1; t <= t_max; ++t) curve.ts[t - 1] = t;

    const double p = 0.5 * q;
    if (q == 0.0 || nu >= 1.0 || D == 0.5) {
        // S_t = t identically (or the zeroth moment)
        for (int t = 1; t <= t_max; ++t) curve.values[t - 1] = std::pow(static_cast<double>(t), p);
        return curve;
    }

    // the denominator's absolute error is amplified by m / E[a^q]
    const double rough = a_power_moment(q, nu, D, 1e-3).value;
    const double m_bound = std::pow(static_cast<double>(t_max), std::max(p, 1.0));
    const Certified denom = a_power_moment(q, nu, D, 0.1 * eps * 0.5 * rough / m_bound);
    double worst = 0.0;
    for (double log_tol = std::max(30.0, -std::log(eps) + 8.0);; log_tol += 12.0) {
        const Numerator num = numerator_curve(p, t_max, D, nu, eps * denom.value, log_tol);
        bool ok = true;
        worst = 0.0;
        for (int t = 1; t <= t_max; ++t) {
            const double m = t == 1 ? 1.0 : num.value[t] / denom.value;
            const double err = t == 1 ? 0.0 : (num.error[t] + m * denom.error) / denom.value;
            curve.values[t - 1] = m;
            curve.error_bounds[t - 1] = err;
            if (!(err <= eps) || !std::isfinite(m)) ok = false;
            if (!(err <= worst)) worst = err;
        }
        if (ok) return curve;
        if (log_tol > 70.0)
            throw BudgetExceeded("moment ratio error estimate " + sci(worst) +
                                 " above requested eps = " + sci(eps));
    }
}

Certified moment_ratio(double q, int t, const Theta& theta, double eps) {
    if (!(theta.D > 0.0) || !(theta.nu > 0.0 && theta.nu <= 1.0))
        throw PreconditionViolation("invalid (D, nu)");
    if (t < 1) throw PreconditionViolation("t must be >= 1");
    const MomentCurve c = moment_ratio_curve(q, t, theta.D, theta.nu, eps);
    return {c.values.back(), c.error_bounds.back()};
}

}  // namespace msarch
