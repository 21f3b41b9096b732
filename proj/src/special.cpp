#include "hinderfit/special.hpp"

#include <cmath>
#include <limits>

#include "hinderfit/error.hpp"

namespace hinderfit {

namespace {

// Continued fraction for I_x(a,b) (modified Lentz). Converges rapidly for
// x < (a+1)/(a+b+2).
double beta_continued_fraction(double a, double b, double x)
{
    constexpr int kMaxIter = 1000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) {
        d = kTiny;
    }
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) {
            d = kTiny;
        }
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) {
            c = kTiny;
        }
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) {
            return h;
        }
    }
    fail(Errc::NoConvergence, "incomplete beta continued fraction did not converge");
}

} // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double regularized_incomplete_beta(double a, double b, double x)
{
    if (!(a > 0.0) || !(b > 0.0) || !(x >= 0.0 && x <= 1.0)) {
        fail(Errc::DomainError, "incomplete beta needs a, b > 0 and 0 <= x <= 1");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (x == 1.0) {
        return 1.0;
    }
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double f_cdf(double f, int df1, int df2)
{
    if (df1 < 1 || df2 < 1 || std::isnan(f)) {
        fail(Errc::DomainError, "F distribution needs df1, df2 >= 1");
    }
    if (f <= 0.0) {
        return 0.0;
    }
    if (std::isinf(f)) {
        return 1.0;
    }
    const double d1 = df1;
    const double d2 = df2;
    // 1 - x computed as d2/(d1 f + d2) keeps precision in the upper tail.
    const double denom = d1 * f + d2;
    const double x = d1 * f / denom;
    const double a = 0.5 * d1;
    const double b = 0.5 * d2;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return regularized_incomplete_beta(a, b, x);
    }
    return 1.0 - regularized_incomplete_beta(b, a, d2 / denom);
}

double f_survival(double f, int df1, int df2)
{
    if (df1 < 1 || df2 < 1 || std::isnan(f)) {
        fail(Errc::DomainError, "F distribution needs df1, df2 >= 1");
    }
    if (f <= 0.0) {
        return 1.0;
    }
    if (std::isinf(f)) {
        return 0.0;
    }
    const double d1 = df1;
    const double d2 = df2;
    return regularized_incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d1 * f + d2));
}

double f_critical(double alpha, int df1, int df2)
{
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail(Errc::DomainError, "alpha must lie in (0, 1)");
    }
    const double target = 1.0 - alpha;
    double lo = 0.0;
    double hi = 1.0;
    while (f_cdf(hi, df1, df2) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            return std::numeric_limits<double>::infinity();
        }
    }
    for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (f_cdf(mid, df1, df2) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace hinderfit
