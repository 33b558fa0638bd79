#include "msarch/nelder_mead.hpp"

#include "msarch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace msarch {

namespace {

using Point = std::vector<double>;

Point along(const Point& from, const Point& to, double s) {
    // from + s (to - from)
    Point out(from.size());
    for (std::size_t k = 0; k < from.size(); ++k) out[k] = from[k] + s * (to[k] - from[k]);
    return out;
}

double diameter(const std::vector<Point>& simplex) {
    double d = 0.0;
    for (std::size_t a = 0; a < simplex.size(); ++a)
        for (std::size_t b = a + 1; b < simplex.size(); ++b) {
            double s = 0.0;
            for (std::size_t k = 0; k < simplex[a].size(); ++k) s += std::pow(simplex[a][k] - simplex[b][k], 2);
            d = std::max(d, std::sqrt(s));
        }
    return d;
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                             const NelderMeadOptions& options) {
    const std::size_t n = start.size();
    if (n == 0) throw PreconditionViolation("nelder_mead needs at least one coordinate");
    NelderMeadResult res;
    auto eval = [&](const Point& p) {
        ++res.evaluations;
        const double v = f(p);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Point> simplex(n + 1, start);
    for (std::size_t k = 0; k < n; ++k) simplex[k + 1][k] += options.initial_step;
    std::vector<double> values(n + 1);
    for (std::size_t k = 0; k <= n; ++k) values[k] = eval(simplex[k]);
    std::vector<std::size_t> order(n + 1);

    while (true) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        {
            std::vector<Point> s(n + 1);
            std::vector<double> v(n + 1);
            for (std::size_t k = 0; k <= n; ++k) {
                s[k] = simplex[order[k]];
                v[k] = values[order[k]];
            }
            simplex.swap(s);
            values.swap(v);
        }
        if (diameter(simplex) < options.diameter_tol) {
            res.converged = true;
            break;
        }
        if (res.evaluations >= options.max_evaluations) break;

        Point centroid(n, 0.0);
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = 0; c < n; ++c) centroid[c] += simplex[k][c] / static_cast<double>(n);
        const Point& worst = simplex[n];

        const Point reflected = along(centroid, worst, -1.0);
        const double fr = eval(reflected);
        if (fr < values[0]) {
            const Point expanded = along(centroid, worst, -2.0);
            const double fe = eval(expanded);
            if (fe < fr) {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if (fr < values[n - 1]) {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        const bool outside = fr < values[n];
        const Point contracted = along(centroid, outside ? reflected : worst, 0.5);
        const double fc = eval(contracted);
        if (fc < (outside ? fr : values[n])) {
            simplex[n] = contracted;
            values[n] = fc;
            continue;
        }
        for (std::size_t k = 1; k <= n; ++k) {
            simplex[k] = along(simplex[0], simplex[k], 0.5);
            values[k] = eval(simplex[k]);
        }
    }
    res.x = simplex[0];
    res.value = values[0];
    return res;
}

}  // namespace msarch
