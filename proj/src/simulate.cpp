#include "msarch/simulate.hpp"

#include "msarch/errors.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>

namespace msarch {

namespace {

constexpr std::size_t kResumInterval = 10'000;

double inverse_cdf_residual(Rng& rng, double dof) {
    const boost::math::students_t_distribution<double> dist(dof);
    return boost::math::quantile(dist, rng.uniform()) / std::sqrt(dof);
}

}  // namespace

double sample_student_residual(Rng& rng, double dof, StudentMethod method) {
    if (method == StudentMethod::InverseCdf) return inverse_cdf_residual(rng, dof);
    double u, v, w;
    do {
        u = rng.symmetric_uniform();
        v = rng.symmetric_uniform();
        w = u * u + v * v;
    } while (w >= 1.0 || w == 0.0);
    // t = u sqrt(dof (w^{-2/dof} - 1) / w); residual z = t / sqrt(dof)
    const double z = u * std::sqrt(std::expm1(-2.0 / dof * std::log(w)) / w);
    if (!std::isfinite(z)) return inverse_cdf_residual(rng, dof);
    return z;
}

std::vector<std::int64_t> sample_restart_path(double nu, std::size_t T, SeedSpec seed) {
    if (!(nu > 0.0 && nu <= 1.0)) throw PreconditionViolation("nu must lie in (0, 1]");
    if (T < 1) throw PreconditionViolation("path length must be >= 1");
    std::vector<std::int64_t> path(T, 1);
    if (nu >= 1.0) return path;

    Rng rng(seed, Component::RestartChain);
    // inverse transform of the geometric stationary law
    const double log_keep = std::log1p(-nu);
    path[0] = 1 + static_cast<std::int64_t>(std::floor(std::log(rng.uniform()) / log_keep));
    for (std::size_t t = 1; t < T; ++t) path[t] = rng.uniform() < nu ? 1 : path[t - 1] + 1;
    return path;
}

std::vector<double> sample_endogenous(const ModelParams& params, std::size_t T, SeedSpec seed,
                                      StudentMethod method) {
    params.validate();
    if (T < 1) throw PreconditionViolation("path length must be >= 1");
    Rng rng(seed, Component::Endogenous);
    std::vector<double> y(T);

    if (const auto* pt = std::get_if<PointVol>(&params.mixture)) {
        for (auto& v : y) v = pt->sigma0 * rng.normal();
        return y;
    }

    const auto& ig = std::get<InverseGamma>(params.mixture);
    const auto M = static_cast<std::size_t>(params.M);
    const double beta_sq = ig.beta * ig.beta;
    std::vector<double> ring(M, 0.0);  // last M squares
    double window = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t lags = std::min(t, M);
        const double dof = ig.alpha + static_cast<double>(lags);
        const double scale = std::sqrt(beta_sq + window);
        y[t] = scale * sample_student_residual(rng, dof, method);

        const double sq = y[t] * y[t];
        double& slot = ring[t % M];
        window += sq - slot;
        slot = sq;
        if ((t + 1) % kResumInterval == 0) {
            window = 0.0;
            for (double s : ring) window += s;
        }
        if (window < 0.0) window = 0.0;
    }
    return y;
}

SimulatedPath sample_returns(const ModelParams& params, std::size_t T, SeedSpec seed) {
    params.validate();
    SimulatedPath path;
    path.params = params;
    path.i = sample_restart_path(params.nu, T, seed);
    path.y = sample_endogenous(params, T, seed);
    path.x.resize(T);
    for (std::size_t t = 0; t < T; ++t) path.x[t] = rescale_factor(path.i[t], params.D) * path.y[t];
    return path;
}

}  // namespace msarch
