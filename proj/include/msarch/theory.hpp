#pragma once

#include "msarch/model.hpp"

#include <optional>
#include <vector>

namespace msarch {

enum class Provenance { Theoretical, Empirical };

/// m_q(t) = E|X_1 + ... + X_t|^q / E|X_1|^q on a grid of t (steps, t = 1 is one step).
struct MomentCurve {
    double q = 1.0;
    std::vector<int> ts;
    std::vector<double> values;
    Provenance provenance = Provenance::Theoretical;
    std::vector<double> error_bounds;  // empty when not available
};

/// r_q(t), autocorrelation of |X|^q between times 1 and t (so r_q(1) = 1).
struct AcfCurve {
    double q = 1.0;
    std::vector<int> ts;
    std::vector<double> values;
    Provenance provenance = Provenance::Theoretical;
};

struct ScalingFit {
    double q = 1.0;
    double H = 0.5;    // generalized Hurst exponent
    double eps = 0.0;  // relative RMS deviation of ln m_q(t)/ln t around q H
};

/// m_q(t) for t = 1..t_max from the short-memory component alone (valid for
/// t <= M + 1). Each value carries an absolute error estimate <= eps.
MomentCurve moment_ratio_curve(double q, int t_max, double D, double nu, double eps = 1e-10);

Certified moment_ratio(double q, int t, const Theta& theta, double eps = 1e-10);

/// Autocorrelation of a_{I_t}^q, t = 1..t_max.
std::vector<double> acf_modulating_curve(double q, int t_max, double D, double nu, double eps = kDefaultEps);
double acf_modulating(double q, int t, const Theta& theta, double eps = kDefaultEps);

/// Time-independent coefficients of r_q^X(t) = u_q + v_q r_q^{aI}(t), 2 <= t <= M + 1.
struct AcfCoefficients {
    double u = 0.0;
    double v = 0.0;
};
AcfCoefficients acf_coefficients(double q, const ModelParams& params, double eps = kDefaultEps);

double acf_returns(double q, int t, const ModelParams& params, double eps = kDefaultEps);

/// Moments of a_I^q behind the return autocorrelation; they depend on (D, nu) only.
struct ModulationStats {
    double q = 1.0;
    double A = 1.0;           // E a_I^q
    double A2 = 1.0;          // E a_I^{2q}
    std::vector<double> cov;  // cov(a_{I_1}^q, a_{I_t}^q), index t - 1
};
ModulationStats modulation_stats(double q, int t_max, double D, double nu, double eps = kDefaultEps);
AcfCurve acf_returns_curve(const ModulationStats& stats, const VolatilityMixture& mixture);
AcfCurve acf_returns_curve(double q, int t_max, const ModelParams& params, double eps = kDefaultEps);

/// Least-squares exponent over t = 2..window_max of the curve.
ScalingFit hurst_fit(const MomentCurve& curve, int window_max);

/// Single-step density of X_t.
Certified marginal_pdf(double x, const ModelParams& params, double eps = kDefaultEps);

/// Limit of |x|^{alpha+1} f_1^X(x) for the inverse-gamma mixture.
double tail_constant(const ModelParams& params, double eps = kDefaultEps);

/// Density of S_t = sqrt((Y_1^2 + ... + Y_t^2) / t), t <= M + 1, inverse-gamma mixture.
double longmem_vol_pdf(double s, int t, double alpha, double beta);

/// r_2^Y(t) for t = 1..t_max: 1 at t = 1, 1/(alpha-1) up to M + 1, then the
/// order-M linear recursion.
AcfCurve endo_acf2_curve(double alpha, int M, int t_max);

/// Root in (0, 1) of sum_{n=1}^{M} lambda^{-n} = alpha + M - 2.
double acf_decay_rate(double alpha, int M);

/// Rare-restart limit of m_q(t) for D < 1/2.
double small_nu_moment_limit(double q, int t, double D);

}  // namespace msarch
