#pragma once

#include "msarch/empirics.hpp"
#include "msarch/model.hpp"
#include "msarch/theory.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace msarch {

/// Complete: inverse-gamma mixture, fits (D, nu, alpha) then beta.
/// Null: point mixture, fits (D, nu) then sigma0.
enum class ModelKind { Complete, Null };

struct ThetaBounds {
    double D_lo = 0.05, D_hi = 0.5;
    double nu_lo = 1e-4, nu_hi = 0.2;
    std::optional<double> alpha_lo;  // default 2 max(Q) + 0.5
    double alpha_hi = 20.0;
};

struct ObjectiveSpec {
    int M = 21;
    std::vector<double> Q{1.0};
    ThetaBounds bounds;
    double eps = 1e-7;  // absolute tolerance of the theoretical moment ratios
    ModelKind kind = ModelKind::Complete;

    double max_q() const;
    double alpha_lo() const;
    void validate() const;
};

/// Relative residuals (theory - empirical) / theory of one moment order, t = 1..M.
struct CurveResiduals {
    double q = 1.0;
    std::vector<double> moment;
    std::vector<double> acf;
};

struct CalibrationResult {
    ModelKind kind = ModelKind::Complete;
    Theta theta_hat;               // alpha is meaningless for the null model
    std::optional<double> scale;   // beta (complete) or sigma0 (null)
    double objective_value = 0.0;
    std::size_t evaluations = 0;
    std::size_t infeasible_probes = 0;
    bool converged = false;
    std::vector<CurveResiduals> residuals;

    ModelParams params(int M) const;
};

struct EmpiricalCurves {
    std::vector<MomentCurve> moments;
    std::vector<AcfCurve> acfs;
};

/// m_q and r_q of the series for every q in Q over t = 1..M.
EmpiricalCurves empirical_curves(const ReturnSeries& x, const ObjectiveSpec& spec);

/// Sum over q in Q and t = 1..M of the squared relative deviations of both
/// curve families. Theory curves come from a process-wide cache.
double gmm_objective(const Theta& theta, const std::vector<MomentCurve>& m_emp, const std::vector<AcfCurve>& r_emp,
                     const ObjectiveSpec& spec);
std::vector<CurveResiduals> gmm_residuals(const Theta& theta, const EmpiricalCurves& emp, const ObjectiveSpec& spec);

/// Coarse grid over the box, then Nelder-Mead from the three best grid points.
/// Requires T >= 50 M. The scale is left unset.
CalibrationResult calibrate_theta(const ReturnSeries& x, const ObjectiveSpec& spec);

/// Least-squares scale from the mean absolute moments |x|^q, q in Q.
double calibrate_beta(const ReturnSeries& x, const Theta& theta, const std::vector<double>& Q);
double calibrate_sigma0(const ReturnSeries& x, double D, double nu, const std::vector<double>& Q);

/// calibrate_theta followed by the matching scale fit.
CalibrationResult calibrate(const ReturnSeries& x, const ObjectiveSpec& spec);

/// Drops every cached theory curve.
void clear_theory_cache();

}  // namespace msarch
