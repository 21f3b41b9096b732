#pragma once

// Forward use of fitted models and accelerated-growth diagnostics.

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "hinderfit/fit.hpp"

namespace hinderfit {

struct Forecast {
    double t = 0.0;
    double Q = 0.0;
    double g = 0.0;
    double x_minus_xh = 0.0;
};

Forecast forecast(const GrowthModel& model, double t, const SolverSettings& settings = {});

/// Forecasts from t_from to t_to inclusive in increments of step.
std::vector<Forecast> forecast_range(const GrowthModel& model, double t_from, double t_to, double step,
                                     const SolverSettings& settings = {});

/// ln 2 / g_u. Throws NonPositiveRate for g_u <= 0.
double doubling_time(double g_u);

/// 2 Q_h for the logistic; hindering series with finitely many terms grow
/// without bound and have none.
std::optional<double> carrying_capacity(const GrowthModel& model);

/// Analytic dg/dQ of a model at Q.
double rate_slope(const GrowthModel& model, double q);

/// Linear growth rate of a perturbation dQ about a trajectory:
/// d(dQ)/dt = dQ (g + Q dg/dQ). Negative means the perturbation decays.
double stability_exponent(double g, double dg_dq, double q);

/// Q = K e^x / (2 - e^x), the solution of g = g_u (1 + Q/K) with Q(0) = K.
/// Throws SingularityReached for x >= ln 2.
double accel_logistic(double K, double x);

struct AccelQuadratic {
    double g_u = 1.0;
    double K = 1.0;
    double alpha_q = 1.0;
};

/// g = g_u / (1 - Q/K + alpha (Q/K)^2). Throws AlphaTooSmall for alpha <= 1/4.
double accel_quadratic_rate(const AccelQuadratic& model, double q);

/// Peak (Q, g) = (K / (2 alpha), alpha g_u / (alpha - 1/4)).
std::pair<double, double> accel_quadratic_peak(const AccelQuadratic& model);

struct TrajectoryPoint {
    double t = 0.0;
    double Q = 0.0;
};

using RateOfQ = std::function<double(double)>;

/// Classical fixed-step RK4 on dQ/dt = g(Q) Q from (t_start, q0) to t_end.
/// The last step is shortened to land on t_end. Throws SingularityReached if
/// Q grows by more than a factor of 10 in one step or stops being finite.
std::vector<TrajectoryPoint> integrate_growth(const RateOfQ& rate_of_q, double q0, double t_start, double t_end,
                                              double step);

} // namespace hinderfit
