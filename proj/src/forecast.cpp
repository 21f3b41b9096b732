#include "hinderfit/forecast.hpp"

#include <cmath>

#include "hinderfit/error.hpp"

namespace hinderfit {

Forecast forecast(const GrowthModel& model, double t, const SolverSettings& settings)
{
    model.validate();
    Forecast point;
    point.t = t;
    point.x_minus_xh = model.x_rel(t);
    const double h = h_of_x(model.family, point.x_minus_xh, settings);
    point.Q = model.Q_h * h;
    point.g = h > 0.0 ? model.g_u * growth_rate_factor(model.family, h) : model.g_u;
    return point;
}

std::vector<Forecast> forecast_range(const GrowthModel& model, double t_from, double t_to, double step,
                                     const SolverSettings& settings)
{
    if (!(step > 0.0) || !(t_to >= t_from)) {
        fail(Errc::InvalidArgument, "forecast range needs step > 0 and t_to >= t_from");
    }
    std::vector<Forecast> out;
    const auto count = static_cast<long long>(std::floor((t_to - t_from) / step + 1e-9));
    for (long long i = 0; i <= count; ++i) {
        out.push_back(forecast(model, t_from + static_cast<double>(i) * step, settings));
    }
    if (out.back().t < t_to - 1e-9 * std::max(1.0, std::abs(t_to))) {
        out.push_back(forecast(model, t_to, settings));
    }
    return out;
}

double doubling_time(double g_u)
{
    if (!(g_u > 0.0)) {
        fail(Errc::NonPositiveRate, "doubling time needs g_u > 0");
    }
    return std::log(2.0) / g_u;
}

std::optional<double> carrying_capacity(const GrowthModel& model)
{
    if (std::holds_alternative<Logistic>(model.family)) {
        return 2.0 * model.Q_h;
    }
    return std::nullopt;
}

double rate_slope(const GrowthModel& model, double q)
{
    model.validate();
    const double h = q / model.Q_h;
    const double f = f_transform(model.family, h);
    // g = g_u / (1 + f(Q/Q_h))  =>  dg/dQ = -g_u f'(h) / ((1 + f)^2 Q_h)
    return -model.g_u * f_transform_slope(model.family, h) / ((1.0 + f) * (1.0 + f) * model.Q_h);
}

double stability_exponent(double g, double dg_dq, double q)
{
    if (!(q > 0.0)) {
        fail(Errc::DomainError, "stability exponent needs Q > 0");
    }
    return g + q * dg_dq;
}

double accel_logistic(double K, double x)
{
    if (!(K > 0.0)) {
        fail(Errc::DomainError, "K must be positive");
    }
    const double ex = std::exp(x);
    if (!(ex < 2.0)) {
        fail(Errc::SingularityReached, "accelerated logistic diverges at x = ln 2");
    }
    return K * ex / (2.0 - ex);
}

namespace {

void check_quadratic(const AccelQuadratic& model)
{
    if (!(model.alpha_q > 0.25)) {
        fail(Errc::AlphaTooSmall, "alpha must exceed 1/4 for a positive growth rate");
    }
    if (!(model.g_u > 0.0) || !(model.K > 0.0)) {
        fail(Errc::DomainError, "g_u and K must be positive");
    }
}

} // namespace

double accel_quadratic_rate(const AccelQuadratic& model, double q)
{
    check_quadratic(model);
    if (!(q >= 0.0)) {
        fail(Errc::DomainError, "Q must be non-negative");
    }
    const double s = q / model.K;
    return model.g_u / (1.0 - s + model.alpha_q * s * s);
}

std::pair<double, double> accel_quadratic_peak(const AccelQuadratic& model)
{
    check_quadratic(model);
    return {model.K / (2.0 * model.alpha_q), model.alpha_q * model.g_u / (model.alpha_q - 0.25)};
}

std::vector<TrajectoryPoint> integrate_growth(const RateOfQ& rate_of_q, double q0, double t_start, double t_end,
                                              double step)
{
    if (!(q0 > 0.0)) {
        fail(Errc::DomainError, "initial Q must be positive");
    }
    if (!(step > 0.0) || !(t_end >= t_start)) {
        fail(Errc::InvalidArgument, "integration needs step > 0 and t_end >= t_start");
    }
    auto rhs = [&](double q) { return rate_of_q(q) * q; };

    std::vector<TrajectoryPoint> path{{t_start, q0}};
    double t = t_start;
    double q = q0;
    while (t < t_end) {
        const double dt = std::min(step, t_end - t);
        const double k1 = rhs(q);
        const double k2 = rhs(q + 0.5 * dt * k1);
        const double k3 = rhs(q + 0.5 * dt * k2);
        const double k4 = rhs(q + dt * k3);
        const double next = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(next) || !(next > 0.0) || next > 10.0 * q) {
            fail(Errc::SingularityReached, "trajectory blew up near t = " + std::to_string(t));
        }
        // Count steps rather than accumulate t to keep the grid exact.
        t = (t_end - t <= step) ? t_end : t_start + static_cast<double>(path.size()) * step;
        q = next;
        path.push_back({t, q});
    }
    return path;
}

} // namespace hinderfit
