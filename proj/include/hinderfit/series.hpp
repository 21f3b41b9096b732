#pragma once

#include <span>
#include <vector>

namespace hinderfit {

/// Ordered (t, Q) observations: t strictly increasing, Q > 0, at least two
/// points. Spacing may be irregular.
class TimeSeries {
public:
    /// Throws InvalidSeries, TooShort or NonPositiveQ when an invariant fails.
    TimeSeries(std::vector<double> t, std::vector<double> q);

    std::span<const double> times() const noexcept { return t_; }
    std::span<const double> values() const noexcept { return q_; }
    std::size_t size() const noexcept { return t_.size(); }

    double t_front() const noexcept { return t_.front(); }
    double t_back() const noexcept { return t_.back(); }
    double span() const noexcept { return t_.back() - t_.front(); }

private:
    std::vector<double> t_;
    std::vector<double> q_;
};

/// Growth-rate samples at interval midpoints; values may be zero or negative.
struct RateSeries {
    std::vector<double> t;
    std::vector<double> g;
};

} // namespace hinderfit
