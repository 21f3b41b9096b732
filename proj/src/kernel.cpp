#include "hinderfit/kernel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include "hinderfit/error.hpp"

namespace hinderfit {

namespace {

// Largest argument for which exp() stays finite.
constexpr double kMaxExpArg = 709.0;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

/// Flat copy of the series, cheap to iterate in the solver.
struct Terms {
    int count = 0;
    std::array<int, kMaxOrder> k{};
    std::array<double, kMaxOrder> a{};
};

enum class Kind { Exponential, Hindering, Logistic };

struct Shape {
    Kind kind = Kind::Exponential;
    Terms terms;
};

Shape shape_of(const GrowthFamily& family)
{
    return std::visit(
        overloaded{
            [](const Exponential&) { return Shape{Kind::Exponential, {}}; },
            [](const SingleTerm& s) {
                if (s.k < 1 || s.k > kMaxOrder) {
                    fail(Errc::InvalidWeights, "single-term order must lie in [1, 16]");
                }
                Shape shape{Kind::Hindering, {}};
                shape.terms.count = 1;
                shape.terms.k[0] = s.k;
                shape.terms.a[0] = 1.0;
                return shape;
            },
            [](const MultiTerm& m) {
                Shape shape{Kind::Hindering, {}};
                for (const auto& [k, a] : m.weights.terms()) {
                    shape.terms.k[shape.terms.count] = k;
                    shape.terms.a[shape.terms.count] = a;
                    ++shape.terms.count;
                }
                return shape;
            },
            [](const Logistic&) { return Shape{Kind::Logistic, {}}; },
            [](const GompertzRef&) -> Shape {
                fail(Errc::UnsupportedFamily, "Gompertz is a reference curve, not a hindering family");
            },
        },
        family);
}

void check_h(double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) {
        fail(Errc::NonPositiveH, "h must be positive and finite");
    }
}

/// `allow_bound` admits the logistic carrying capacity h = 2 itself, where
/// the growth rate is a well-defined 0.
void check_h(const Shape& shape, double h, bool allow_bound = false)
{
    check_h(h);
    if (shape.kind == Kind::Logistic && (h > 2.0 || (h == 2.0 && !allow_bound))) {
        fail(Errc::LogisticOutOfRange, "logistic h must be below its bound of 2");
    }
}

/// a_k h^k evaluated as exp(k ln h + ln a_k).
double weighted_power(double a, int k, double log_h)
{
    const double arg = k * log_h + std::log(a);
    if (arg > kMaxExpArg) {
        fail(Errc::OverflowGuard, "h^k exceeds the representable range");
    }
    return std::exp(arg);
}

double series_sum(const Terms& terms, double h)
{
    const double log_h = std::log(h);
    double sum = 0.0;
    for (int i = 0; i < terms.count; ++i) {
        sum += weighted_power(terms.a[i], terms.k[i], log_h);
    }
    return sum;
}

/// Root of F(u) = u + sum (a_k/k)(e^{ku} - 1) - x in u = ln h.
///
/// F is increasing and convex, so Newton from the right of the root converges
/// monotonically. The bracket [lo, hi] is analytic:
///   x > 0:  F(0) = -x < 0 and F(u) >= u - x, F(u) >= u + (a_k/k)(e^{ku}-1) - x
///   x < 0:  F(x) < 0 and F(x + s) > 0 with s = sum a_k/k.
/// Newton steps that leave the bracket fall back to bisection. `slope_out`
/// receives F' at the last iterate, close enough to F'(root) to extrapolate
/// the next guess of a batch.
double solve_log_h(const Terms& terms, double x, double guess, const SolverSettings& settings,
                   double* slope_out = nullptr)
{
    if (x == 0.0) {
        if (slope_out != nullptr) {
            *slope_out = 2.0;
        }
        return 0.0;
    }
    double lo = 0.0;
    double hi = 0.0;
    if (x > 0.0) {
        hi = x;
        for (int i = 0; i < terms.count; ++i) {
            const double k = terms.k[i];
            hi = std::min(hi, std::log1p(k * x / terms.a[i]) / k);
        }
    } else {
        double s = 0.0;
        for (int i = 0; i < terms.count; ++i) {
            s += terms.a[i] / terms.k[i];
        }
        lo = x;
        hi = std::min(0.0, x + s);
    }

    double u = std::isfinite(guess) ? std::clamp(guess, lo, hi) : hi;
    for (int iter = 0; iter < settings.max_iter; ++iter) {
        double value = u - x;
        double slope = 1.0;
        const double eu = std::exp(u);
        for (int i = 0; i < terms.count; ++i) {
            const int k = terms.k[i];
            // e^{ku} by repeated multiplication; k <= 16 keeps the error at a few ulp.
            double ek = eu;
            for (int j = 1; j < k; ++j) {
                ek *= eu;
            }
            value += terms.a[i] / k * (ek - 1.0);
            slope += terms.a[i] * ek;
        }
        if (value == 0.0) {
            return u;
        }
        if (value > 0.0) {
            hi = u;
        } else {
            lo = u;
        }
        if (slope_out != nullptr) {
            *slope_out = slope;
        }
        const double newton = value / slope;
        if (std::abs(newton) <= settings.rel_tol) {
            // A converged step may round onto the bracket edge; accept it
            // rather than bisecting.
            return std::clamp(u - newton, lo, hi);
        }
        double next = u - newton;
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        u = next;
        if (hi - lo <= settings.rel_tol) {
            return u;
        }
    }
    std::ostringstream msg;
    msg << "hindering solve did not converge in " << settings.max_iter << " iterations at x = " << x;
    fail(Errc::NoConvergence, msg.str());
}

void check_settings(const SolverSettings& settings)
{
    if (!(settings.rel_tol > 0.0) || settings.max_iter < 1) {
        fail(Errc::InvalidSettings, "solver settings require rel_tol > 0 and max_iter >= 1");
    }
}

double h_from_shape(const Shape& shape, double x, double guess_u, const SolverSettings& settings,
                    double* u_out, double* slope_out = nullptr)
{
    if (!std::isfinite(x)) {
        fail(Errc::DomainError, "x must be finite");
    }
    switch (shape.kind) {
    case Kind::Exponential:
        return std::exp(x);
    case Kind::Logistic:
        return 2.0 / (1.0 + std::exp(-x));
    case Kind::Hindering:
        break;
    }
    const double u = solve_log_h(shape.terms, x, guess_u, settings, slope_out);
    if (u_out != nullptr) {
        *u_out = u;
    }
    return std::exp(u);
}

} // namespace

HinderingWeights::HinderingWeights(std::map<int, double> terms) : terms_(std::move(terms))
{
    if (terms_.empty()) {
        fail(Errc::InvalidWeights, "hindering series needs at least one term");
    }
    double sum = 0.0;
    for (const auto& [k, a] : terms_) {
        if (k < 1 || k > kMaxOrder) {
            fail(Errc::InvalidWeights, "hindering order " + std::to_string(k) + " outside [1, 16]");
        }
        if (!(a > 0.0) || !std::isfinite(a)) {
            fail(Errc::InvalidWeights, "hindering weight a_" + std::to_string(k) + " must be positive");
        }
        sum += a;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        fail(Errc::InvalidWeights, "hindering weights must sum to 1");
    }
}

HinderingWeights HinderingWeights::normalized(std::map<int, double> terms)
{
    double sum = 0.0;
    for (const auto& [k, a] : terms) {
        sum += a;
    }
    if (sum > 0.0 && std::isfinite(sum)) {
        for (auto& [k, a] : terms) {
            a /= sum;
        }
    }
    return HinderingWeights(std::move(terms));
}

std::string family_name(const GrowthFamily& family)
{
    return std::visit(overloaded{
                          [](const Exponential&) { return std::string("exponential"); },
                          [](const SingleTerm&) { return std::string("sth"); },
                          [](const MultiTerm&) { return std::string("multi"); },
                          [](const Logistic&) { return std::string("logistic"); },
                          [](const GompertzRef&) { return std::string("gompertz"); },
                      },
                      family);
}

std::string family_label(const GrowthFamily& family)
{
    if (const auto* s = std::get_if<SingleTerm>(&family)) {
        return "sth(k=" + std::to_string(s->k) + ")";
    }
    if (const auto* m = std::get_if<MultiTerm>(&family)) {
        std::string label = "multi[";
        bool first = true;
        for (const auto& [k, a] : m->weights.terms()) {
            label += (first ? "" : ",") + std::to_string(k);
            first = false;
        }
        return label + "]";
    }
    return family_name(family);
}

void validate_family(const GrowthFamily& family)
{
    if (const auto* s = std::get_if<SingleTerm>(&family); s != nullptr && (s->k < 1 || s->k > kMaxOrder)) {
        fail(Errc::InvalidWeights, "single-term order must lie in [1, 16]");
    }
}

std::optional<HinderingWeights> hindering_weights(const GrowthFamily& family)
{
    if (const auto* s = std::get_if<SingleTerm>(&family)) {
        return HinderingWeights({{s->k, 1.0}});
    }
    if (const auto* m = std::get_if<MultiTerm>(&family)) {
        return m->weights;
    }
    return std::nullopt;
}

double x_of_h(const GrowthFamily& family, double h)
{
    const Shape shape = shape_of(family);
    check_h(shape, h);
    const double log_h = std::log(h);
    switch (shape.kind) {
    case Kind::Exponential:
        return log_h;
    case Kind::Logistic:
        return log_h - std::log(2.0 - h);
    case Kind::Hindering:
        break;
    }
    double x = log_h;
    for (int i = 0; i < shape.terms.count; ++i) {
        const int k = shape.terms.k[i];
        if (k * log_h > kMaxExpArg) {
            fail(Errc::OverflowGuard, "h^k exceeds the representable range");
        }
        x += shape.terms.a[i] / k * std::expm1(k * log_h);
    }
    return x;
}

double h_of_x(const GrowthFamily& family, double x, const SolverSettings& settings)
{
    check_settings(settings);
    const Shape shape = shape_of(family);
    return h_from_shape(shape, x, std::numeric_limits<double>::quiet_NaN(), settings, nullptr);
}

void h_of_x(const GrowthFamily& family, std::span<const double> xs, std::span<double> out,
            const SolverSettings& settings)
{
    if (xs.size() != out.size()) {
        fail(Errc::InvalidArgument, "h_of_x: input and output sizes differ");
    }
    check_settings(settings);
    const Shape shape = shape_of(family);
    // Each solve starts from the tangent extrapolation of the previous root,
    // u + dx / F'(u). F^{-1} is concave, so the guess lies right of the root.
    double u = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double guess = i > 0 ? u + (xs[i] - xs[i - 1]) / slope : u;
        out[i] = h_from_shape(shape, xs[i], guess, settings, &u, &slope);
    }
}

double dh_dx(const GrowthFamily& family, double h)
{
    return h * growth_rate_factor(family, h);
}

double growth_rate_factor(const GrowthFamily& family, double h)
{
    const Shape shape = shape_of(family);
    check_h(shape, h, true);
    switch (shape.kind) {
    case Kind::Exponential:
        return 1.0;
    case Kind::Logistic:
        return 1.0 - 0.5 * h;
    case Kind::Hindering:
        break;
    }
    return 1.0 / (1.0 + series_sum(shape.terms, h));
}

double f_transform(const GrowthFamily& family, double h)
{
    const Shape shape = shape_of(family);
    check_h(shape, h);
    switch (shape.kind) {
    case Kind::Exponential:
        return 0.0;
    case Kind::Logistic:
        return h / (2.0 - h);
    case Kind::Hindering:
        break;
    }
    return series_sum(shape.terms, h);
}

double f_transform_slope(const GrowthFamily& family, double h)
{
    const Shape shape = shape_of(family);
    check_h(shape, h);
    switch (shape.kind) {
    case Kind::Exponential:
        return 0.0;
    case Kind::Logistic:
        return 2.0 / ((2.0 - h) * (2.0 - h));
    case Kind::Hindering:
        break;
    }
    const double log_h = std::log(h);
    double slope = 0.0;
    for (int i = 0; i < shape.terms.count; ++i) {
        const int k = shape.terms.k[i];
        slope += k * weighted_power(shape.terms.a[i], k, log_h) / h;
    }
    return slope;
}

std::map<int, double> alpha_coefficients(const HinderingWeights& weights, double q_h)
{
    if (!(q_h > 0.0) || !std::isfinite(q_h)) {
        fail(Errc::NonPositiveQh, "Q_h must be positive");
    }
    std::map<int, double> alpha;
    for (const auto& [k, a] : weights.terms()) {
        alpha[k] = a * std::exp(-k * std::log(q_h));
    }
    return alpha;
}

double asymmetry(const GrowthFamily& family, double x, const SolverSettings& settings)
{
    if (x == 0.0) {
        return 0.0;
    }
    const double right = h_of_x(family, x, settings);
    const double left = h_of_x(family, -x, settings);
    return (right - 1.0) / (1.0 - left) - 1.0;
}

double asymptotic(const GrowthFamily& family, double x, Regime side)
{
    if (const auto* s = std::get_if<SingleTerm>(&family)) {
        const double k = s->k;
        if (side == Regime::Unhindered) {
            return std::exp(x + 1.0 / k);
        }
        if (1.0 + k * x <= 0.0) {
            fail(Errc::DomainError, "hindered asymptote needs 1 + kx > 0");
        }
        return std::pow(1.0 + k * x, 1.0 / k);
    }
    if (std::holds_alternative<Logistic>(family)) {
        return side == Regime::Unhindered ? 2.0 * std::exp(x) : -2.0 * std::expm1(-x);
    }
    fail(Errc::UnsupportedFamily, "asymptotic forms exist for single-term and logistic only");
}

std::optional<DerivativePeak> derivative_peak(int k)
{
    if (k < 1) {
        fail(Errc::DomainError, "order k must be >= 1");
    }
    if (k == 1) {
        return std::nullopt;
    }
    const double kd = k;
    DerivativePeak peak;
    peak.x = -(std::log(kd - 1.0) + (kd - 2.0) / (kd - 1.0)) / kd;
    peak.value = std::pow(kd, -1.0 / kd) * std::pow(1.0 - 1.0 / kd, 1.0 - 1.0 / kd);
    return peak;
}

DerivativePeak logistic_derivative_peak() noexcept { return {0.0, 0.5}; }

namespace {

void check_gompertz_scale(double tau, double K)
{
    if (!(tau > 0.0) || !(K > 0.0)) {
        fail(Errc::DomainError, "Gompertz tau and K must be positive");
    }
}

} // namespace

double gompertz_eval(double b, double tau, double K, double t)
{
    check_gompertz_scale(tau, K);
    if (!(b > 0.0)) {
        fail(Errc::DomainError, "Gompertz b must be positive");
    }
    return K * std::exp(-b * std::exp(-t / tau));
}

double gompertz_rate_of_q(double tau, double K, double q)
{
    check_gompertz_scale(tau, K);
    if (!(q > 0.0) || q > K) {
        fail(Errc::DomainError, "Gompertz rate needs 0 < Q <= K");
    }
    return std::log(K / q) / tau;
}

double gompertz_rate_of_t(double b, double tau, double t)
{
    check_gompertz_scale(tau, 1.0);
    if (!(b > 0.0)) {
        fail(Errc::DomainError, "Gompertz b must be positive");
    }
    return b / tau * std::exp(-t / tau);
}

} // namespace hinderfit
