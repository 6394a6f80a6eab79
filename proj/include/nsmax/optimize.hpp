#pragma once

// Unconstrained Nelder-Mead minimizer with restarts. Box constraints are
// handled by the caller through a change of variables.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace nsmax::optimize {

struct NelderMeadConfig {
    std::size_t max_evals = 4000;  // per run; restarts get their own budget
    double xtol = 1e-3;            // simplex diameter (max-norm) for convergence
    double ftol = 1e-9;            // restart stops when the improvement falls below this
    std::size_t restarts = 3;
    double step = 0.5;             // default initial simplex edge
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    bool converged = false;
    std::size_t evaluations = 0;
    double f_start = 0.0;
};

using Objective = std::function<double(std::span<const double>)>;

// Minimizes f from x0. `steps` (optional, same length as x0) overrides the
// per-coordinate simplex offsets. Non-finite objective values count as +inf.
// The returned point is never worse than x0.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const NelderMeadConfig& cfg,
                             std::span<const double> steps = {});

}  // namespace nsmax::optimize
