#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace msarch {

struct NelderMeadOptions {
    double initial_step = 0.5;   // edge length of the starting simplex along each axis
    double diameter_tol = 1e-4;  // stop once every pair of vertices is closer than this
    std::size_t max_evaluations = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Unconstrained simplex minimization. Non-finite values count as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace msarch
