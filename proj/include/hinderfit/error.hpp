#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hinderfit {

/// Machine-readable failure classes. The CLI maps every one of these to
/// exit code 2 and reports `to_string(code)` as the reason.
enum class Errc {
    NonPositiveH,
    LogisticOutOfRange,
    OverflowGuard,
    NoConvergence,
    UnsupportedFamily,
    NoPeak,
    DomainError,
    NonPositiveQh,
    InvalidWeights,
    InvalidSettings,
    InvalidSeries,
    TooShort,
    ZeroVariance,
    NonPositiveQ,
    DegenerateDof,
    LogisticDomain,
    OptimizerFailure,
    GateFailed,
    NonPositiveRate,
    SingularityReached,
    AlphaTooSmall,
    ParseError,
    DuplicateTime,
    TooFewRows,
    InvalidArgument,
    IoError,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

} // namespace hinderfit
