#pragma once

#include "msarch/model.hpp"
#include "msarch/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace msarch {

struct SimulatedPath {
    std::vector<std::int64_t> i;  // hidden restart indices, i_t >= 1
    std::vector<double> y;        // endogenous component
    std::vector<double> x;        // observed returns, x_t = a_{i_t} y_t
    ModelParams params;
};

enum class StudentMethod {
    Polar,       // polar transform of a uniform point in the unit disc
    InverseCdf,  // quantile of the Student law
};

/// Draws Z with density proportional to (1 + z^2)^{-(dof+1)/2}, i.e. t_dof / sqrt(dof).
/// The polar method falls back to the inverse CDF if it produces a non-finite value.
double sample_student_residual(Rng& rng, double dof, StudentMethod method = StudentMethod::Polar);

std::vector<std::int64_t> sample_restart_path(double nu, std::size_t T, SeedSpec seed);

/// ARCH(M) recursion with Student residuals for the inverse-gamma mixture, iid
/// normals with standard deviation sigma0 for the point mixture. Exactly
/// stationary from t = 1, so no burn-in is applied.
std::vector<double> sample_endogenous(const ModelParams& params, std::size_t T, SeedSpec seed,
                                      StudentMethod method = StudentMethod::Polar);

/// Restart chain and endogenous process on independent sub-streams of `seed`;
/// the components equal the standalone samplers called with the same seed.
SimulatedPath sample_returns(const ModelParams& params, std::size_t T, SeedSpec seed);

}  // namespace msarch
