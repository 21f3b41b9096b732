#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hinderfit/error.hpp"
#include "hinderfit/kernel.hpp"
#include "hinderfit/special.hpp"
#include "hinderfit/trend.hpp"
#include "oracles.hpp"

using namespace hinderfit;

namespace {

Errc code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an hinderfit::Error");
    return Errc::IoError;
}

std::vector<double> iota_values(int n)
{
    std::vector<double> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1.0);
    return v;
}

TimeSeries series_of(std::vector<double> q)
{
    std::vector<double> t(q.size());
    std::iota(t.begin(), t.end(), 0.0);
    return TimeSeries(std::move(t), std::move(q));
}

} // namespace

TEST_CASE("time series validation")
{
    CHECK(code_of([] { TimeSeries({0.0}, {1.0}); }) == Errc::TooShort);
    CHECK(code_of([] { TimeSeries({0.0, 1.0}, {1.0}); }) == Errc::InvalidSeries);
    CHECK(code_of([] { TimeSeries({0.0, 0.0}, {1.0, 2.0}); }) == Errc::InvalidSeries);
    CHECK(code_of([] { TimeSeries({1.0, 0.0}, {1.0, 2.0}); }) == Errc::InvalidSeries);
    CHECK(code_of([] { TimeSeries({0.0, 1.0}, {1.0, 0.0}); }) == Errc::NonPositiveQ);
    CHECK(code_of([] { TimeSeries({0.0, 1.0}, {1.0, NAN}); }) == Errc::InvalidSeries);
    const TimeSeries s({0.0, 0.5, 3.0}, {1.0, 2.0, 4.0});
    CHECK(s.span() == 3.0);
    CHECK(s.size() == 3);
}

TEST_CASE("Mann-Kendall S")
{
    CHECK(mk_s(iota_values(8)) == 28);
    CHECK(mk_s(std::vector<double>(8, 5.0)) == 0);
    CHECK(mk_s(std::vector<double>{3, 1, 2}) == -1);
    CHECK(code_of([] { mk_s(std::vector<double>{1.0}); }) == Errc::TooShort);

    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> pick(0, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> v(25);
        for (double& x : v) {
            x = pick(rng);
        }
        CHECK(mk_s(v) == oracle::mk_s(v));
        std::vector<double> r(v.rbegin(), v.rend());
        CHECK(mk_s(r) == -mk_s(v));
    }
}

TEST_CASE("Mann-Kendall test on a strictly increasing series")
{
    const auto r = mk_test(iota_values(8), TrendDirection::Increasing);
    CHECK(r.S == 28);
    CHECK(r.var_S == doctest::Approx(65.333333333333).epsilon(1e-12));
    CHECK(r.Z == doctest::Approx(27.0 / std::sqrt(196.0 / 3.0)).epsilon(1e-14));
    CHECK(r.Z == doctest::Approx(3.3404).epsilon(1e-4));
    CHECK(r.p_one_tailed < 0.001);
    CHECK(r.p_one_tailed == doctest::Approx(0.5 * std::erfc(r.Z / std::sqrt(2.0))).epsilon(1e-12));
    CHECK(r.n == 8);

    auto rev = iota_values(8);
    std::reverse(rev.begin(), rev.end());
    const auto d = mk_test(rev, TrendDirection::Decreasing);
    CHECK(d.Z == -r.Z);
    CHECK(d.p_one_tailed == doctest::Approx(r.p_one_tailed).epsilon(1e-14));
    const auto wrong_way = mk_test(rev, TrendDirection::Increasing);
    CHECK(wrong_way.p_one_tailed > 0.999);
}

TEST_CASE("Mann-Kendall ties and preconditions")
{
    const std::vector<double> v{1, 2, 2, 3, 3, 3, 4, 5, 5, 6};
    const auto r = mk_test(v, TrendDirection::Increasing);
    CHECK(r.S == oracle::mk_s(v));
    CHECK(r.var_S == doctest::Approx(oracle::mk_var(v)).epsilon(1e-14));
    CHECK(r.Z == doctest::Approx(oracle::mk_z(r.S, r.var_S)).epsilon(1e-14));
    CHECK(code_of([] { mk_test(iota_values(7), TrendDirection::Increasing); }) == Errc::TooShort);
    CHECK(code_of([] { mk_test(std::vector<double>(9, 1.0), TrendDirection::Increasing); }) == Errc::ZeroVariance);
    // Round-off in a derived series must not register as a trend.
    std::vector<double> wobble(10, 0.05);
    wobble[3] = 0.05 * (1 + 1e-15);
    CHECK(code_of([&] { mk_test(wobble, TrendDirection::Decreasing); }) == Errc::ZeroVariance);
}

TEST_CASE("Mann-Kendall null calibration")
{
    std::mt19937_64 rng(20240611);
    std::normal_distribution<double> normal;
    std::vector<double> sample(20);
    for (double& x : sample) {
        x = normal(rng);
    }
    int rejected = 0;
    constexpr int kTrials = 10000;
    for (int i = 0; i < kTrials; ++i) {
        std::shuffle(sample.begin(), sample.end(), rng);
        rejected += mk_test(sample, TrendDirection::Increasing).p_one_tailed < 0.05;
    }
    const double rate = static_cast<double>(rejected) / kTrials;
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
}

TEST_CASE("growth rates")
{
    const TimeSeries two({0.0, 1.0}, {100.0, 110.0});
    const auto g = growth_rates(two);
    REQUIRE(g.g.size() == 1);
    CHECK(g.g[0] == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(g.g[0] == doctest::Approx(0.09531).epsilon(1e-4));
    CHECK(g.t[0] == 0.5);

    const std::vector<double> t{0.0, 0.3, 1.0, 2.7, 2.8, 5.0};
    std::vector<double> q;
    for (double s : t) {
        q.push_back(std::exp(0.05 * s));
    }
    for (double rate : growth_rates(TimeSeries(t, q)).g) {
        CHECK(rate == doctest::Approx(0.05).epsilon(1e-12));
    }
    for (double rate : growth_rates(series_of(std::vector<double>(5, 3.0))).g) {
        CHECK(rate == 0.0);
    }

    // Dense samples of a hindered curve recover g(t) = g_u / (1 + f(h)).
    const GrowthFamily family = SingleTerm{2};
    const double g_u = 0.4;
    std::vector<double> tt;
    std::vector<double> qq;
    for (int i = 0; i <= 2000; ++i) {
        tt.push_back(-10.0 + 0.01 * i);
        qq.push_back(5.0 * h_of_x(family, g_u * tt.back()));
    }
    const auto rates = growth_rates(TimeSeries(tt, qq));
    for (std::size_t i = 0; i < rates.g.size(); i += 97) {
        const double h = h_of_x(family, g_u * rates.t[i]);
        CHECK(rates.g[i] == doctest::Approx(g_u * growth_rate_factor(family, h)).epsilon(1e-4));
    }
}

TEST_CASE("special functions")
{
    CHECK(regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0);
    CHECK(regularized_incomplete_beta(1.0, 1.0, 0.5) == doctest::Approx(0.5).epsilon(1e-15));
    // I_x(a, 1) = x^a.
    CHECK(regularized_incomplete_beta(3.5, 1.0, 0.7) == doctest::Approx(std::pow(0.7, 3.5)).epsilon(1e-13));
    // I_x(a, b) = 1 - I_{1-x}(b, a).
    CHECK(regularized_incomplete_beta(2.5, 7.0, 0.3) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(7.0, 2.5, 0.7)).epsilon(1e-13));
    CHECK(code_of([] { regularized_incomplete_beta(0.0, 1.0, 0.5); }) == Errc::DomainError);
    CHECK(code_of([] { regularized_incomplete_beta(1.0, 1.0, 1.5); }) == Errc::DomainError);

    CHECK(f_cdf(1.0, 10, 10) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(f_cdf(0.0, 3, 5) == 0.0);
    CHECK(code_of([] { f_cdf(1.0, 0, 5); }) == Errc::DomainError);
    double prev = -1.0;
    for (double f = 0.0; f < 20.0; f += 0.25) {
        const double c = f_cdf(f, 3, 17);
        CHECK(c >= prev);
        prev = c;
    }
    // Spot grid against direct integration of the density.
    for (int d1 : {1, 2, 5}) {
        for (int d2 : {4, 30, 197}) {
            for (double f : {0.3, 1.0, 2.5, 6.0}) {
                CHECK(std::abs(f_survival(f, d1, d2) - oracle::f_survival(f, d1, d2)) < 1e-8);
                CHECK(std::abs(f_cdf(f, d1, d2) + f_survival(f, d1, d2) - 1.0) < 1e-12);
            }
        }
    }
    CHECK(normal_cdf(0.0) == 0.5);
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(f_critical(0.05, 1, 197) == doctest::Approx(3.889).epsilon(1e-3));
    CHECK(f_survival(f_critical(0.01, 3, 40), 3, 40) == doctest::Approx(0.01).epsilon(1e-9));
}

TEST_CASE("F-test")
{
    const auto same = f_test(1.5, 1.5, 3, 4, 50, 0.05);
    CHECK(same.F == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK_FALSE(same.reject_null);

    const auto worse = f_test(1.0, 1.2, 3, 4, 50, 0.05);
    CHECK(worse.F == 0.0);
    CHECK_FALSE(worse.reject_null);

    const auto r = f_test(2.0, 1.0, 3, 4, 100, 0.05);
    CHECK(r.F == doctest::Approx(96.0).epsilon(1e-14));
    CHECK(r.df1 == 1);
    CHECK(r.df2 == 96);
    CHECK(r.p_value == doctest::Approx(oracle::f_survival(96.0, 1, 96)).epsilon(1e-6));
    CHECK(r.reject_null);
    CHECK(r.reject_null == (r.p_value < r.alpha));

    // df1 = 1 with a huge df2 approaches the two-sided normal tail of sqrt(F).
    const double n = 1e6 + 4;
    const double rss_full = 1.0;
    const double rss_restricted = rss_full * (1.0 + 4.0 / (n - 4));
    const auto big = f_test(rss_restricted, rss_full, 3, 4, static_cast<int>(n), 0.05);
    CHECK(big.F == doctest::Approx(4.0).epsilon(1e-9));
    CHECK(big.p_value == doctest::Approx(std::erfc(2.0 / std::sqrt(2.0))).epsilon(1e-4));

    CHECK(code_of([] { f_test(2.0, 1.0, 3, 4, 4, 0.05); }) == Errc::DegenerateDof);
    CHECK(code_of([] { f_test(2.0, 1.0, 4, 4, 40, 0.05); }) == Errc::InvalidArgument);
    const auto perfect = f_test(1.0, 0.0, 2, 3, 20, 0.05);
    CHECK(std::isinf(perfect.F));
    CHECK(perfect.reject_null);
}

TEST_CASE("fvu")
{
    const TimeSeries data = series_of({1.0, 2.0, 3.0});
    const std::vector<double> exact{1.0, 2.0, 3.0};
    auto q = r2_fvu(data, exact);
    CHECK(q.fvu == 0.0);
    CHECK(q.r2 == 1.0);
    CHECK(q.fvu_log == 0.0);
    const std::vector<double> mean(3, 2.0);
    CHECK(r2_fvu(data, mean).fvu == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> off{1.0, 2.0, 4.0};
    q = r2_fvu(data, off);
    CHECK(q.fvu == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(q.r2 == doctest::Approx(0.5).epsilon(1e-15));
    const double mlog = (std::log(2.0) + std::log(3.0)) / 3.0;
    const double sst = mlog * mlog + std::pow(std::log(2.0) - mlog, 2) + std::pow(std::log(3.0) - mlog, 2);
    CHECK(q.fvu_log == doctest::Approx(std::pow(std::log(4.0 / 3.0), 2) / sst).epsilon(1e-13));
    CHECK(code_of([&] { r2_fvu(series_of({2.0, 2.0, 2.0}), exact); }) == Errc::ZeroVariance);
    const std::vector<double> two(2, 1.0);
    CHECK(code_of([&] { r2_fvu(data, two); }) == Errc::InvalidArgument);
}
