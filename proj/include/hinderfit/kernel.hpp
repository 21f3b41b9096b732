#pragma once

// Dimensionless growth functions.
//
// A decelerated growth process is Q(t) = Q_h h(g_u t - x_h), where the
// hindering function h solves
//
//     ln h + sum_k (a_k / k) (h^k - 1) = x,    sum_k a_k = 1,
//
// with h(0) = 1 and h'(0) = 1/2. Everything in this header is a pure function
// of its arguments.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>

namespace hinderfit {

inline constexpr int kMaxOrder = 16;

/// Weights a_k of the hindering series. Orders are distinct integers in
/// [1, kMaxOrder], every weight is positive and the weights sum to one.
class HinderingWeights {
public:
    /// Throws Errc::InvalidWeights unless the invariants hold (sum to 1e-12).
    explicit HinderingWeights(std::map<int, double> terms);

    /// Divides by the sum first, so any positive weights are accepted.
    static HinderingWeights normalized(std::map<int, double> terms);

    const std::map<int, double>& terms() const noexcept { return terms_; }
    std::size_t size() const noexcept { return terms_.size(); }
    int max_order() const noexcept { return terms_.rbegin()->first; }

    bool operator==(const HinderingWeights&) const = default;

private:
    std::map<int, double> terms_;
};

struct Exponential {
    bool operator==(const Exponential&) const = default;
};
struct SingleTerm {
    int k = 1;
    bool operator==(const SingleTerm&) const = default;
};
struct MultiTerm {
    HinderingWeights weights;
    bool operator==(const MultiTerm&) const = default;
};
struct Logistic {
    bool operator==(const Logistic&) const = default;
};
/// Reference curve only: g(Q -> 0) diverges, so it has no g_u and is not a
/// hindering family. Kernel operations reject it with UnsupportedFamily.
struct GompertzRef {
    double b = 1.0;
    double tau = 1.0;
    double K = 1.0;
    bool operator==(const GompertzRef&) const = default;
};

using GrowthFamily = std::variant<Exponential, SingleTerm, MultiTerm, Logistic, GompertzRef>;

/// Short label: "exponential", "sth", "multi", "logistic", "gompertz".
std::string family_name(const GrowthFamily& family);

/// Human-readable label including orders, e.g. "sth(k=2)" or "multi[1,8]".
std::string family_label(const GrowthFamily& family);

/// Throws InvalidWeights for SingleTerm orders outside [1, kMaxOrder].
void validate_family(const GrowthFamily& family);

/// Series weights for SingleTerm and MultiTerm; nullopt otherwise.
std::optional<HinderingWeights> hindering_weights(const GrowthFamily& family);

struct SolverSettings {
    double rel_tol = 1e-12;
    int max_iter = 100;
};

double x_of_h(const GrowthFamily& family, double h);
double h_of_x(const GrowthFamily& family, double x, const SolverSettings& settings = {});

/// Batch form. Each solve is warm-started from the previous root, which makes
/// sorted grids (the common case when fitting) cost a few Newton steps each.
void h_of_x(const GrowthFamily& family, std::span<const double> xs, std::span<double> out,
            const SolverSettings& settings = {});

double dh_dx(const GrowthFamily& family, double h);
/// g / g_u as a function of h = Q / Q_h.
double growth_rate_factor(const GrowthFamily& family, double h);
double f_transform(const GrowthFamily& family, double h);
/// df/dh, used for analytic dg/dQ.
double f_transform_slope(const GrowthFamily& family, double h);

/// alpha_k = a_k / Q_h^k, the dimensional coefficients of the series solution.
std::map<int, double> alpha_coefficients(const HinderingWeights& weights, double q_h);

/// (h(x) - 1) / (1 - h(-x)) - 1; the x = 0 limit is 0.
double asymmetry(const GrowthFamily& family, double x, const SolverSettings& settings = {});

enum class Regime { Unhindered, Hindered };

/// Leading-order forms: e^{x+1/k} and (1+kx)^{1/k} for SingleTerm,
/// 2e^x and 2(1-e^{-x}) for Logistic.
double asymptotic(const GrowthFamily& family, double x, Regime side);

struct DerivativePeak {
    double x = 0.0;
    double value = 0.0;
};

/// Closed-form maximum of dh/dx for single-term order k. k = 1 has no peak
/// (the derivative rises monotonically toward 1) and returns nullopt.
std::optional<DerivativePeak> derivative_peak(int k);
DerivativePeak logistic_derivative_peak() noexcept;

// Gompertz reference curve Q(t) = K exp(-b e^{-t/tau}).
double gompertz_eval(double b, double tau, double K, double t);
double gompertz_rate_of_q(double tau, double K, double q);
double gompertz_rate_of_t(double b, double tau, double t);

} // namespace hinderfit
