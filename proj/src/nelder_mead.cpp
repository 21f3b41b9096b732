#include "hinderfit/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hinderfit/error.hpp"

namespace hinderfit::optim {

namespace {

struct Vertex {
    std::vector<double> x;
    double value = 0.0;
};

bool collapsed(const std::vector<Vertex>& simplex, double rel_tol)
{
    const auto& best = simplex.front().x;
    for (std::size_t v = 1; v < simplex.size(); ++v) {
        for (std::size_t i = 0; i < best.size(); ++i) {
            if (std::abs(simplex[v].x[i] - best[i]) > rel_tol * std::max(1.0, std::abs(best[i]))) {
                return false;
            }
        }
    }
    return true;
}

} // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> start, std::span<const double> steps,
                             const NelderMeadOptions& options)
{
    const std::size_t n = start.size();
    if (n == 0 || steps.size() != n) {
        fail(Errc::InvalidArgument, "nelder_mead: start and steps must have equal, nonzero size");
    }

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<Vertex> simplex(n + 1);
    simplex[0].x = start;
    simplex[0].value = eval(start);
    for (std::size_t i = 0; i < n; ++i) {
        simplex[i + 1].x = start;
        simplex[i + 1].x[i] += steps[i];
        simplex[i + 1].value = eval(simplex[i + 1].x);
    }
    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value < b.value; };

    std::vector<double> centroid(n);
    std::vector<double> trial(n);
    auto along = [&](double coeff) {
        const auto& worst = simplex.back().x;
        for (std::size_t i = 0; i < n; ++i) {
            trial[i] = centroid[i] + coeff * (worst[i] - centroid[i]);
        }
        return eval(trial);
    };

    bool converged = false;
    while (evals < options.max_evals) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);
        if (collapsed(simplex, options.rel_tol)) {
            converged = true;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t v = 0; v < n; ++v) {
            for (std::size_t i = 0; i < n; ++i) {
                centroid[i] += simplex[v].x[i] / static_cast<double>(n);
            }
        }

        const double best = simplex.front().value;
        const double second_worst = simplex[n - 1].value;
        Vertex& worst = simplex.back();

        const double reflected = along(-1.0);
        if (reflected < best) {
            std::vector<double> reflected_x = trial;
            const double expanded = along(-2.0);
            if (expanded < reflected) {
                worst.x = trial;
                worst.value = expanded;
            } else {
                worst.x = std::move(reflected_x);
                worst.value = reflected;
            }
            continue;
        }
        if (reflected < second_worst) {
            worst.x = trial;
            worst.value = reflected;
            continue;
        }
        // Outside contraction when the reflection beats the worst point,
        // inside contraction otherwise.
        const bool outside = reflected < worst.value;
        const double contracted = along(outside ? -0.5 : 0.5);
        if (contracted < (outside ? reflected : worst.value)) {
            worst.x = trial;
            worst.value = contracted;
            continue;
        }
        const auto best_x = simplex.front().x;
        for (std::size_t v = 1; v <= n; ++v) {
            for (std::size_t i = 0; i < n; ++i) {
                simplex[v].x[i] = best_x[i] + 0.5 * (simplex[v].x[i] - best_x[i]);
            }
            simplex[v].value = eval(simplex[v].x);
        }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_value);

    NelderMeadResult result;
    result.x = simplex.front().x;
    result.value = simplex.front().value;
    result.evals = evals;
    result.converged = converged;
    return result;
}

} // namespace hinderfit::optim
