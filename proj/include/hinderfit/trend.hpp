#pragma once

// Statistical gates and fit diagnostics: Mann-Kendall trend test, finite
// difference growth rates, the nested-model F-test and fvu.

#include <span>

#include "hinderfit/series.hpp"

namespace hinderfit {

enum class TrendDirection { Increasing, Decreasing };

const char* to_string(TrendDirection direction) noexcept;

struct TrendResult {
    long long S = 0;
    double var_S = 0.0;
    double Z = 0.0;
    double p_one_tailed = 1.0;
    TrendDirection direction = TrendDirection::Increasing;
    int n = 0;
};

struct FTestResult {
    double F = 0.0;
    int df1 = 0;
    int df2 = 0;
    double p_value = 1.0;
    double f_crit = 0.0;
    bool reject_null = false;
    /// Level the test was run at; see `comparisons`.
    double alpha = 0.05;
    /// Number of candidate full models the tested one was picked from. Model
    /// searches run the test at alpha / comparisons (Bonferroni).
    int comparisons = 1;
};

struct FitQuality {
    double r2 = 0.0;
    double fvu = 0.0;
    double r2_log = 0.0;
    double fvu_log = 0.0;
};

/// Minimum series length for the Mann-Kendall test.
inline constexpr int kMinTrendLength = 8;

/// Pair differences within this relative distance count as ties, so that
/// round-off in derived series (growth rates of an exact exponential) does not
/// manufacture a trend.
inline constexpr double kTieRelTol = 1e-12;

/// S = sum_{i<j} sgn(v_j - v_i). Throws TooShort for fewer than two values.
long long mk_s(std::span<const double> values);
long long mk_s(const TimeSeries& series);

/// Throws TooShort (n < 8) and ZeroVariance (every value tied).
TrendResult mk_test(std::span<const double> values, TrendDirection direction);
TrendResult mk_test(const TimeSeries& series, TrendDirection direction);

/// g_i = (ln Q_{i+1} - ln Q_i) / (t_{i+1} - t_i) at the interval midpoint.
RateSeries growth_rates(const TimeSeries& series);

/// Nested-model F-test of a restricted fit against a fuller one. F is clamped
/// to 0 when the fuller fit is worse. Throws DegenerateDof when n <= p_full.
FTestResult f_test(double rss_restricted, double rss_full, int p_restricted, int p_full, int n,
                   double alpha);

/// fvu = sum (Q - Q_hat)^2 / sum (Q - mean)^2 on the linear and log scales.
FitQuality r2_fvu(const TimeSeries& data, std::span<const double> predictions);

} // namespace hinderfit
