#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gpsim {

enum class ErrorCode {
    NonPositiveParameter,
    EpsilonOutOfRange,
    OddOrTooSmallM,
    LengthMismatch,
    UnsupportedOrder,
    NonFiniteState,
    PositivityLost,
    StepTooLarge,
    OrbitSingularity,
    PreconditionDeltaNonpositive,
    DeltaNonpositive,
    PerturbationBreaksPositivity,
    NonpositiveReservoir,
    BoundViolation,
    NonMonotoneTime,
    IoError,
    ConfigError,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library. `what()` reads "<ErrorName>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

} // namespace gpsim
