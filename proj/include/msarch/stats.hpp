#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace msarch {

struct Histogram {
    std::vector<double> edges;   // bins + 1 increasing edges
    std::vector<std::size_t> counts;
    std::size_t total = 0;       // sample size including values outside the range

    std::size_t bins() const { return counts.size(); }
    double width(std::size_t k) const { return edges[k + 1] - edges[k]; }
    double density(std::size_t k) const;
    /// binomial standard error of density(k)
    double density_se(std::size_t k) const;
};

/// Freedman-Diaconis bin width 2 IQR n^{-1/3} on the symmetric range
/// [-half_range, half_range] (default: max |x|). At most max_bins bins.
Histogram freedman_diaconis_histogram(std::span<const double> x, std::optional<double> half_range = std::nullopt,
                                      std::size_t max_bins = 20000);

/// Same bin-width rule on an explicit range [lo, hi].
Histogram freedman_diaconis_histogram(std::span<const double> x, double lo, double hi, std::size_t max_bins = 20000);

double quantile(std::vector<double> x, double p);

/// sup |F_n - F| against a continuous CDF.
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// P(K > lambda) for the limiting Kolmogorov law.
double kolmogorov_survival(double lambda);
/// Asymptotic p-value of a one-sample distance d at sample size n.
double ks_pvalue(double d, double n);
/// Distance at which ks_pvalue(d, n) = level (effective n for two samples: n m / (n + m)).
double ks_critical_value(double n, double level = 0.05);

double normal_two_sided_p(double z);

}  // namespace msarch
