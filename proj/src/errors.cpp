#include "gpsim/errors.hpp"

namespace gpsim {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NonPositiveParameter: return "NonPositiveParameter";
    case ErrorCode::EpsilonOutOfRange: return "EpsilonOutOfRange";
    case ErrorCode::OddOrTooSmallM: return "OddOrTooSmallM";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::PositivityLost: return "PositivityLost";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::OrbitSingularity: return "OrbitSingularity";
    case ErrorCode::PreconditionDeltaNonpositive: return "PreconditionDeltaNonpositive";
    case ErrorCode::DeltaNonpositive: return "DeltaNonpositive";
    case ErrorCode::PerturbationBreaksPositivity: return "PerturbationBreaksPositivity";
    case ErrorCode::NonpositiveReservoir: return "NonpositiveReservoir";
    case ErrorCode::BoundViolation: return "BoundViolation";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail)
    , code_(code)
    , detail_(detail)
{
}

} // namespace gpsim
