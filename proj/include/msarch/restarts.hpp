#pragma once

#include "msarch/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace msarch {

/// Posterior of a restart at the centre of a window of 2 tau + 1 returns, using
/// only the returns inside the window and the stationary law for the index at
/// its first step.
struct WindowPosterior {
    double restart_prob = 0.0;
    double log_density = 0.0;  // log joint density of the window returns
};

/// Enumerates (initial index) x (restart pattern) for windows of one length.
class WindowScanner {
public:
    /// Throws WindowTooWide if 2 tau + 1 > M + 1.
    WindowScanner(const ModelParams& params, int tau, double eps = 1e-14);

    /// window.size() must be 2 tau + 1.
    WindowPosterior operator()(std::span<const double> window) const;

    std::int64_t index_cutoff() const { return i_max_; }

private:
    ModelParams params_;
    int tau_;
    int n_;
    std::int64_t i_max_;
    std::vector<double> inv_a2_;  // 1 / a_i^2, i = 1..i_max + n
    std::vector<double> log_a_;
    std::vector<double> pattern_log_prob_;
    std::vector<int> first_restart_;  // position of the first restart in the pattern, n if none
};

/// P[I_t = 1 | x_{t-tau..t+tau}], t 0-based with tau <= t < T - tau.
double restart_posterior(std::span<const double> x, std::size_t t, int tau, const ModelParams& params);

struct RestartDiagnostics {
    std::vector<double> posterior;             // NaN where the window does not fit
    std::vector<std::size_t> restart_times;    // sorted, 0-based
    std::vector<std::int64_t> i_path;
    std::vector<double> y_path;
    double threshold = 0.0;                    // smallest selected posterior, NaN if none
    int tau = 2;
};

/// Number of restarts to select: ceil(nu T), or 0 when nu T < 1.
std::size_t restart_budget(double nu, std::size_t T);

/// Local maxima of the posterior (p_{t-1} < p_t >= p_{t+1}, so plateaus give
/// their left edge), highest first with ties to the earlier time. When there are
/// fewer peaks than `count` the remaining slots go to the highest non-peak times.
std::vector<std::size_t> select_restarts(const std::vector<double>& posterior, std::size_t count);

/// Posterior over every interior time, restart_budget(nu, T) selections and the
/// reconstructed paths.
RestartDiagnostics detect_restarts(std::span<const double> x, const ModelParams& params, int tau = 2);

struct Reconstruction {
    std::vector<std::int64_t> i;
    std::vector<double> y;
};

/// Index path resetting to 1 at each restart time and counting up otherwise;
/// i = 1 at t = 0 whatever the restart set. y_t = x_t / a_{i_t}.
Reconstruction reconstruct_endogenous(std::span<const double> x, const std::vector<std::size_t>& restart_times,
                                      double D);

/// S = sqrt(mean of y^2) over every window of `window` consecutive values
/// (step 1). Requires 1 <= window <= M + 1.
std::vector<double> longmem_vol_samples(std::span<const double> y, int window, int M);

/// Fraction of true restart times with a detected restart at most `tolerance` steps away.
double restart_recovery(const std::vector<std::size_t>& detected, const std::vector<std::size_t>& truth,
                        std::size_t tolerance);

/// Times with i_t = 1.
std::vector<std::size_t> restart_times_of(const std::vector<std::int64_t>& i_path);

}  // namespace msarch
