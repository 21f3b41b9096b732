#pragma once

// Mapping dimensionless shapes onto data, Q(t) = Q_h h(g_u (t - t_h)), and
// the statistically gated model-selection ladder.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hinderfit/kernel.hpp"
#include "hinderfit/series.hpp"
#include "hinderfit/trend.hpp"

namespace hinderfit {

struct GrowthModel {
    GrowthFamily family;
    double g_u = 1.0;
    double Q_h = 1.0;
    double t_h = 0.0;

    /// Throws DomainError / NonPositiveQh / NonPositiveRate on a bad model.
    void validate() const;

    /// Dimensionless shift x_h = g_u (t_h - t0) for a series starting at t0.
    double x_h(double t0) const noexcept { return g_u * (t_h - t0); }
    /// x - x_h at time t.
    double x_rel(double t) const noexcept { return g_u * (t - t_h); }
};

double predict(const GrowthModel& model, double t, const SolverSettings& settings = {});
std::vector<double> predict(const GrowthModel& model, std::span<const double> t,
                            const SolverSettings& settings = {});

/// Relative residual sum of squares, sum (Q_hat / Q - 1)^2.
double rss(const GrowthModel& model, const TimeSeries& series, const SolverSettings& settings = {});

/// x_h = -h^{-1}(Q_0 / Q_h), the start of the series in shifted coordinates,
/// as a function of q_h = Q_h / Q_0.
double xh_shift(const GrowthFamily& family, double q_h);

struct GateResult {
    double alpha = 0.05;
    TrendResult q_trend;
    std::optional<TrendResult> g_trend;
    bool q_pass = false;
    bool g_pass = false;
    /// Empty when both gates pass.
    std::string reason;

    bool passed() const noexcept { return q_pass && g_pass; }
};

/// MK test for an increasing Q and a decreasing growth rate.
GateResult check_growth_preconditions(const TimeSeries& series, double alpha);

struct FitResult {
    GrowthModel model;
    double rss = 0.0;
    int n = 0;
    int n_params = 0;
    double fvu = 0.0;
    double fvu_log = 0.0;
    bool converged = false;
    int restarts_used = 0;
};

/// Free parameters counted by the F-test: 2 for the exponential, 3 for
/// single-term and logistic, plus one per additional hindering term.
int parameter_count(const GrowthFamily& family);

struct FitOptions {
    SolverSettings solver;
    /// Cold starts seeded from the rate heuristics.
    int starts = 8;
    /// Starts derived from a caller-supplied initial model.
    int warm_starts = 3;
    /// Simplex diameter for convergence (relative, per coordinate).
    double rel_tol = 1e-9;
    /// Looser tolerance for the screening pass over all starts.
    double screen_tol = 1e-4;
    int screen_evals = 400;
    int polish_evals = 4000;
    int max_restarts = 6;
};

/// Minimizes the relative RSS over g_u, Q_h, t_h and, for MultiTerm, the
/// weights of the given orders. Q_h enters the model linearly and is profiled
/// out in closed form. `init` seeds the search instead of the heuristics.
/// Throws OptimizerFailure if no start yields a finite objective.
FitResult fit_family(const TimeSeries& series, const GrowthFamily& family,
                     const std::optional<GrowthModel>& init = std::nullopt, const FitOptions& options = {});

/// Fills fvu / fvu_log of a result from its model.
void score_fit(FitResult& fit, const TimeSeries& series, const SolverSettings& settings = {});

struct MinimalSelection {
    std::vector<FitResult> sth_fits;
    std::optional<FitResult> logistic;
    FitResult best_sth;
    FitResult chosen;
};

struct SelectionOptions {
    int k_min = 1;
    int k_max = 12;
    bool use_sth = true;
    bool use_logistic = true;
    FitOptions fit;
};

/// Fits every SingleTerm(k) in [k_min, k_max] and the logistic; the smallest
/// RSS wins, ties going to smaller k and then to single-term.
MinimalSelection select_minimal(const TimeSeries& series, const SelectionOptions& options = {});

struct LadderReport {
    std::optional<GateResult> gate;
    std::vector<FitResult> candidates;
    FitResult chosen;
    std::vector<FTestResult> f_chain;
    /// Labels "restricted -> full" for each entry of f_chain.
    std::vector<std::string> f_chain_labels;
    double q_h_ratio = 0.0;
};

struct LadderOptions {
    double alpha = 0.05;
    int max_terms = 3;
    /// Largest order tried when adding a term.
    int k_cap = 12;
    /// Orders that get a full fit after the rough pass over all of them.
    int finalists = 3;
    /// Passes that move single orders of a new rung by one or two steps.
    int max_order_sweeps = 3;
    FitOptions fit;
};

/// Adds hindering terms one at a time to a single-term base fit. Each rung
/// grid-searches the new order, refits all weights, then nudges single orders
/// while that lowers the RSS. A rung is accepted only if the F-test rejects at
/// alpha. A logistic base ends the ladder immediately.
LadderReport extend_ladder(const TimeSeries& series, const FitResult& base, const LadderOptions& options = {});

struct PipelineOptions {
    double alpha = 0.05;
    int k_min = 1;
    int k_max = 12;
    int max_terms = 3;
    bool use_sth = true;
    bool use_logistic = true;
    bool use_multi = true;
    /// Continue past failed MK gates instead of throwing GateFailed.
    bool override_gates = false;
    FitOptions fit;
};

/// Gates, exponential baseline, minimal model and term ladder.
LadderReport run_ladder(const TimeSeries& series, const PipelineOptions& options = {});

/// Worker count for independent fits: HINDERFIT_THREADS if set, else the
/// hardware concurrency.
int worker_count();

} // namespace hinderfit
