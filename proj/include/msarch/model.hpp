#pragma once

#include <cstdint>
#include <variant>

namespace msarch {

/// Inverse-gamma weighting of sigma^2: shape alpha, scale beta (return units).
struct InverseGamma {
    double alpha = 0.0;
    double beta = 0.0;
};

/// Degenerate volatility weighting, sigma fixed to sigma0 (the "null" model).
struct PointVol {
    double sigma0 = 0.0;
};

using VolatilityMixture = std::variant<InverseGamma, PointVol>;

void validate(const VolatilityMixture& mixture);
bool is_inverse_gamma(const VolatilityMixture& mixture);

struct ModelParams {
    double D = 0.5;    // scaling exponent of the modulating sequence
    double nu = 1.0;   // restart probability per step
    VolatilityMixture mixture = InverseGamma{4.0, 1.0};
    int M = 1;         // memory order of the endogenous process

    void validate() const;
};

/// The scale-free calibration coordinates (D, nu, alpha).
struct Theta {
    double D = 0.5;
    double nu = 1.0;
    double alpha = 4.0;

    void validate() const;
};

/// A series value together with an absolute error bound.
struct Certified {
    double value = 0.0;
    double error = 0.0;
};

inline constexpr double kDefaultEps = 1e-12;

/// a_i = sqrt(i^{2D} - (i-1)^{2D}); a_1 = 1.
double rescale_factor(std::int64_t i, double D);

/// a_i^2 evaluated without cancellation for large i.
double rescale_factor_sq(std::int64_t i, double D);

/// (i+L-1)^{2D} - (i-1)^{2D} = a_i^2 + ... + a_{i+L-1}^2, cancellation-free.
double rescale_block_sq(std::int64_t i, std::int64_t L, double D);

double restart_stationary_pmf(std::int64_t i, double nu);
/// P[I_{t+1} = i | I_t = j]: nu into i = 1, 1 - nu into i = j + 1.
double restart_transition_prob(std::int64_t i, std::int64_t j, double nu);

/// Smallest i_max with (1 - nu)^{i_max} < eps.
std::int64_t geometric_truncation(double nu, double eps);

/// E|Z|^q for Z with density proportional to (1 + z^2)^{-(dof+1)/2}.
double student_abs_moment(double q, double dof);

/// E|Y_1|^q of the endogenous process.
double endo_abs_moment(double q, const VolatilityMixture& mixture);

/// E[|Y_1|^q |Y_2|^q]. By exchangeability this is also E[|Y_1|^q |Y_t|^q]
/// for every 2 <= t <= M + 1.
double endo_cross_moment(double q, const VolatilityMixture& mixture);

/// E[a_{I_1}^q] under the stationary restart law.
Certified a_power_moment(double q, double nu, double D, double eps = kDefaultEps);

}  // namespace msarch
