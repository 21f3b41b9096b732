#include "hinderfit/error.hpp"

namespace hinderfit {

std::string_view to_string(Errc code) noexcept
{
    switch (code) {
    case Errc::NonPositiveH:
        return "NonPositiveH";
    case Errc::LogisticOutOfRange:
        return "LogisticOutOfRange";
    case Errc::OverflowGuard:
        return "OverflowGuard";
    case Errc::NoConvergence:
        return "NoConvergence";
    case Errc::UnsupportedFamily:
        return "UnsupportedFamily";
    case Errc::NoPeak:
        return "NoPeak";
    case Errc::DomainError:
        return "DomainError";
    case Errc::NonPositiveQh:
        return "NonPositiveQh";
    case Errc::InvalidWeights:
        return "InvalidWeights";
    case Errc::InvalidSettings:
        return "InvalidSettings";
    case Errc::InvalidSeries:
        return "InvalidSeries";
    case Errc::TooShort:
        return "TooShort";
    case Errc::ZeroVariance:
        return "ZeroVariance";
    case Errc::NonPositiveQ:
        return "NonPositiveQ";
    case Errc::DegenerateDof:
        return "DegenerateDof";
    case Errc::LogisticDomain:
        return "LogisticDomain";
    case Errc::OptimizerFailure:
        return "OptimizerFailure";
    case Errc::GateFailed:
        return "GateFailed";
    case Errc::NonPositiveRate:
        return "NonPositiveRate";
    case Errc::SingularityReached:
        return "SingularityReached";
    case Errc::AlphaTooSmall:
        return "AlphaTooSmall";
    case Errc::ParseError:
        return "ParseError";
    case Errc::DuplicateTime:
        return "DuplicateTime";
    case Errc::TooFewRows:
        return "TooFewRows";
    case Errc::InvalidArgument:
        return "InvalidArgument";
    case Errc::IoError:
        return "IoError";
    }
    return "Unknown";
}

} // namespace hinderfit
