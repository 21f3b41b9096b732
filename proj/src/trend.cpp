#include "hinderfit/trend.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hinderfit/error.hpp"
#include "hinderfit/special.hpp"

namespace hinderfit {

namespace {

int tolerant_sign(double a, double b)
{
    const double diff = b - a;
    if (std::abs(diff) <= kTieRelTol * std::max(std::abs(a), std::abs(b))) {
        return 0;
    }
    return diff > 0.0 ? 1 : -1;
}

// Sum over tie groups of t(t-1)(2t+5), grouping with the same tolerance as
// tolerant_sign.
double tie_correction(std::span<const double> values)
{
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i + 1;
        while (j < sorted.size() && tolerant_sign(sorted[j - 1], sorted[j]) == 0) {
            ++j;
        }
        const double t = static_cast<double>(j - i);
        total += t * (t - 1.0) * (2.0 * t + 5.0);
        i = j;
    }
    return total;
}

} // namespace

const char* to_string(TrendDirection direction) noexcept
{
    return direction == TrendDirection::Increasing ? "increasing" : "decreasing";
}

TimeSeries::TimeSeries(std::vector<double> t, std::vector<double> q) : t_(std::move(t)), q_(std::move(q))
{
    if (t_.size() != q_.size()) {
        fail(Errc::InvalidSeries, "time and value columns differ in length");
    }
    if (t_.size() < 2) {
        fail(Errc::TooShort, "a time series needs at least two points");
    }
    for (std::size_t i = 0; i < t_.size(); ++i) {
        if (!std::isfinite(t_[i]) || !std::isfinite(q_[i])) {
            fail(Errc::InvalidSeries, "non-finite value at index " + std::to_string(i));
        }
        if (!(q_[i] > 0.0)) {
            fail(Errc::NonPositiveQ, "Q must be positive (index " + std::to_string(i) + ")");
        }
        if (i > 0 && !(t_[i] > t_[i - 1])) {
            fail(Errc::InvalidSeries, "times must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
}

long long mk_s(std::span<const double> values)
{
    if (values.size() < 2) {
        fail(Errc::TooShort, "Mann-Kendall S needs at least two values");
    }
    long long s = 0;
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) {
            s += tolerant_sign(values[i], values[j]);
        }
    }
    return s;
}

long long mk_s(const TimeSeries& series) { return mk_s(series.values()); }

TrendResult mk_test(std::span<const double> values, TrendDirection direction)
{
    const auto n = static_cast<int>(values.size());
    if (n < kMinTrendLength) {
        fail(Errc::TooShort, "Mann-Kendall test needs at least 8 values, got " + std::to_string(n));
    }
    TrendResult result;
    result.n = n;
    result.direction = direction;
    result.S = mk_s(values);
    const double nd = n;
    result.var_S = (nd * (nd - 1.0) * (2.0 * nd + 5.0) - tie_correction(values)) / 18.0;
    if (!(result.var_S > 0.0)) {
        fail(Errc::ZeroVariance, "Mann-Kendall variance is zero (all values tied)");
    }
    const double sd = std::sqrt(result.var_S);
    if (result.S > 0) {
        result.Z = (static_cast<double>(result.S) - 1.0) / sd;
    } else if (result.S < 0) {
        result.Z = (static_cast<double>(result.S) + 1.0) / sd;
    }
    result.p_one_tailed =
        direction == TrendDirection::Increasing ? normal_cdf(-result.Z) : normal_cdf(result.Z);
    return result;
}

TrendResult mk_test(const TimeSeries& series, TrendDirection direction)
{
    return mk_test(series.values(), direction);
}

RateSeries growth_rates(const TimeSeries& series)
{
    const auto t = series.times();
    const auto q = series.values();
    RateSeries rates;
    rates.t.reserve(t.size() - 1);
    rates.g.reserve(t.size() - 1);
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
        rates.t.push_back(0.5 * (t[i] + t[i + 1]));
        rates.g.push_back(std::log(q[i + 1] / q[i]) / (t[i + 1] - t[i]));
    }
    return rates;
}

FTestResult f_test(double rss_restricted, double rss_full, int p_restricted, int p_full, int n,
                   double alpha)
{
    if (p_full <= p_restricted) {
        fail(Errc::InvalidArgument, "F-test needs p_full > p_restricted");
    }
    if (n <= p_full) {
        fail(Errc::DegenerateDof, "F-test needs more data points (" + std::to_string(n) +
                                      ") than full-model parameters (" + std::to_string(p_full) + ")");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        fail(Errc::DomainError, "alpha must lie in (0, 1)");
    }
    if (!(rss_restricted >= 0.0) || !(rss_full >= 0.0)) {
        fail(Errc::DomainError, "RSS values must be non-negative");
    }
    FTestResult result;
    result.alpha = alpha;
    result.df1 = p_full - p_restricted;
    result.df2 = n - p_full;
    const double gain = std::max(0.0, rss_restricted - rss_full);
    if (gain == 0.0) {
        result.F = 0.0;
    } else if (rss_full == 0.0) {
        result.F = std::numeric_limits<double>::infinity();
    } else {
        result.F = (gain / result.df1) / (rss_full / result.df2);
    }
    result.p_value = f_survival(result.F, result.df1, result.df2);
    result.f_crit = f_critical(alpha, result.df1, result.df2);
    result.reject_null = result.p_value < alpha;
    return result;
}

FitQuality r2_fvu(const TimeSeries& data, std::span<const double> predictions)
{
    const auto q = data.values();
    if (predictions.size() != q.size()) {
        fail(Errc::InvalidArgument, "prediction count differs from data length");
    }
    const auto n = static_cast<double>(q.size());
    double mean = 0.0;
    double mean_log = 0.0;
    for (double v : q) {
        mean += v;
        mean_log += std::log(v);
    }
    mean /= n;
    mean_log /= n;
    double ss_res = 0.0;
    double ss_tot = 0.0;
    double ss_res_log = 0.0;
    double ss_tot_log = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
        ss_res += (q[i] - predictions[i]) * (q[i] - predictions[i]);
        ss_tot += (q[i] - mean) * (q[i] - mean);
        const double lq = std::log(q[i]);
        const double lp = predictions[i] > 0.0 ? std::log(predictions[i]) : -std::numeric_limits<double>::infinity();
        ss_res_log += (lq - lp) * (lq - lp);
        ss_tot_log += (lq - mean_log) * (lq - mean_log);
    }
    if (!(ss_tot > 0.0) || !(ss_tot_log > 0.0)) {
        fail(Errc::ZeroVariance, "fvu is undefined for constant data");
    }
    FitQuality quality;
    quality.fvu = ss_res / ss_tot;
    quality.r2 = 1.0 - quality.fvu;
    quality.fvu_log = ss_res_log / ss_tot_log;
    quality.r2_log = 1.0 - quality.fvu_log;
    return quality;
}

} // namespace hinderfit
