#pragma once

#include <functional>
#include <span>
#include <vector>

namespace hinderfit::optim {

using Objective = std::function<double(std::span<const double>)>;

struct NelderMeadOptions {
    /// Converged when every vertex lies within rel_tol * max(1, |x_best_i|)
    /// of the best vertex in each coordinate.
    double rel_tol = 1e-9;
    int max_evals = 4000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evals = 0;
    bool converged = false;
};

/// Standard Nelder-Mead simplex (reflection 1, expansion 2, contraction 1/2,
/// shrink 1/2). The initial simplex is start plus start + steps[i] e_i.
/// Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, std::span<const double> steps,
                             const NelderMeadOptions& options = {});

} // namespace hinderfit::optim
