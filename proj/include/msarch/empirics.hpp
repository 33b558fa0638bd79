#pragma once

#include "msarch/theory.hpp"

#include <optional>
#include <span>
#include <vector>

namespace msarch {

struct ReturnSeries {
    std::vector<double> values;
    bool mean_removed = false;

    std::size_t size() const { return values.size(); }
};

/// x_t = ln p_t - ln p_{t-1} minus the sample drift, so the returns sum to zero.
ReturnSeries log_returns(std::span<const double> prices);

/// M_q(t) / M_q(1) with M_q(t) the mean of |x_{n+1} + ... + x_{n+t}|^q over all
/// T + 1 - t overlapping windows.
double empirical_moment_ratio(std::span<const double> x, double q, int t);
MomentCurve empirical_moment_curve(std::span<const double> x, double q, int t_max);

/// Sample autocorrelation of |x|^q between times 1 and t (lag t - 1), using the
/// overall mean and the lag-specific pair count.
double empirical_acf(std::span<const double> x, double q, int t);
AcfCurve empirical_acf_curve(std::span<const double> x, double q, int t_max);

/// hurst_fit of the empirical curve over t = 2..window_max; window_max <= T/10.
ScalingFit empirical_hurst(std::span<const double> x, double q, int window_max);

struct MugShotGrid {
    std::vector<int> t_h;
    std::vector<int> t_r;
    std::vector<std::optional<double>> values;  // row-major, t_h outer

    std::optional<double> at(std::size_t h, std::size_t r) const { return values[h * t_r.size() + r]; }
};

/// Correlation between the RMS return over a historical window of t_h steps and
/// over the following t_r steps, across all start positions. Cells where either
/// window variance vanishes are left empty.
MugShotGrid mug_shot(std::span<const double> x, const std::vector<int>& t_h_grid, const std::vector<int>& t_r_grid);

/// max |chi(a, b) - chi(b, a)| over horizon pairs present in both grid axes.
double mug_shot_asymmetry(const MugShotGrid& grid);

struct SignMagnitudeReport {
    std::size_t n = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    double binomial_p = 1.0;      // fair coin, two-sided exact
    std::size_t runs = 0;
    double runs_z = 0.0;
    double runs_p = 1.0;          // Wald-Wolfowitz, two-sided
    std::vector<double> cross_corr;  // corr(sign y_t, |y_{t+k}|), k = 0..5
    std::vector<double> cross_p;
    double level = 0.01;

    bool signs_fair() const { return binomial_p >= level; }
    bool signs_independent() const { return runs_p >= level; }
    bool magnitude_independent() const;
    bool all_pass() const { return signs_fair() && signs_independent() && magnitude_independent(); }
};

SignMagnitudeReport sign_magnitude_diagnostics(std::span<const double> y, double level = 0.01);

}  // namespace msarch
