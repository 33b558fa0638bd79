#include "msarch/stats.hpp"

#include "msarch/errors.hpp"

#include <algorithm>
#include <cmath>

namespace msarch {

double Histogram::density(std::size_t k) const {
    return static_cast<double>(counts[k]) / (static_cast<double>(total) * width(k));
}

double Histogram::density_se(std::size_t k) const {
    const double n = static_cast<double>(total);
    const double p = static_cast<double>(counts[k]) / n;
    return std::sqrt(p * (1.0 - p) / n) / width(k);
}

double quantile(std::vector<double> x, double p) {
    if (x.empty()) throw PreconditionViolation("quantile of an empty sample");
    std::sort(x.begin(), x.end());
    const double pos = p * static_cast<double>(x.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, x.size() - 1);
    return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

Histogram freedman_diaconis_histogram(std::span<const double> x, std::optional<double> half_range,
                                      std::size_t max_bins) {
    if (x.size() < 4) throw PreconditionViolation("histogram needs at least 4 values");
    double R = 0.0;
    for (double e : x) R = std::max(R, std::abs(e));
    if (half_range) R = *half_range;
    if (!(R > 0.0)) throw ZeroVariance("histogram of an all-zero sample");
    return freedman_diaconis_histogram(x, -R, R, max_bins);
}

Histogram freedman_diaconis_histogram(std::span<const double> x, double lo, double hi, std::size_t max_bins) {
    if (x.size() < 4) throw PreconditionViolation("histogram needs at least 4 values");
    if (!(hi > lo)) throw ZeroVariance("histogram range is empty");
    std::vector<double> v(x.begin(), x.end());
    const double iqr = quantile(v, 0.75) - quantile(v, 0.25);
    const double L = hi - lo;
    double h = 2.0 * iqr * std::pow(static_cast<double>(x.size()), -1.0 / 3.0);
    std::size_t bins = h > 0.0 ? static_cast<std::size_t>(std::ceil(L / h)) : 1;
    bins = std::clamp<std::size_t>(bins, 1, max_bins);
    h = L / static_cast<double>(bins);

    Histogram out;
    out.total = x.size();
    out.counts.assign(bins, 0);
    out.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k) out.edges[k] = lo + h * static_cast<double>(k);
    out.edges.back() = hi;
    for (double e : x) {
        if (e < lo || e > hi) continue;
        auto k = static_cast<std::size_t>((e - lo) / h);
        if (k >= bins) k = bins - 1;
        out.counts[k]++;
    }
    return out;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw PreconditionViolation("KS statistic of an empty sample");
    std::vector<double> xs(sample.begin(), sample.end());
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double F = cdf(xs[k]);
        d = std::max({d, static_cast<double>(k + 1) / n - F, F - static_cast<double>(k) / n});
    }
    return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw PreconditionViolation("KS statistic of an empty sample");
    std::vector<double> u(a.begin(), a.end()), v(b.begin(), b.end());
    std::sort(u.begin(), u.end());
    std::sort(v.begin(), v.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    const double n = static_cast<double>(u.size()), m = static_cast<double>(v.size());
    while (i < u.size() && j < v.size()) {
        const double s = std::min(u[i], v[j]);
        while (i < u.size() && u[i] <= s) ++i;
        while (j < v.size() && v[j] <= s) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    return d;
}

double kolmogorov_survival(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double ks_pvalue(double d, double n) {
    const double sn = std::sqrt(n);
    // Stephens' small-sample correction
    return kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
}

double ks_critical_value(double n, double level) {
    if (!(level > 0.0 && level < 1.0)) throw PreconditionViolation("level must lie in (0, 1)");
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (ks_pvalue(mid, n) > level)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

}  // namespace msarch
