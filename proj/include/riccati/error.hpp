#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace riccati {

/// Failure categories raised by the library. Every estimate-engine failure
/// that is tied to a position carries the offending x.
enum class ErrorKind {
    InvalidArgument,
    InvalidGrid,
    PoleEncountered,
    DegenerateToLine,
    NotImaginary,
    ZeroPotential,
    SeriesNotConverged,
    ZeroWavefunction,
    ConditionViolated,
    ZeroCrossing,
    NegativeRadius,
    ConsistencyViolated,
    SignViolation,
    PolicyExhausted,
    JumpImpossible,
    BlowUp,
    CalibrationFailed,
    ConstraintViolated,
    HypothesisViolated,
    ParseError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, std::optional<double> where = std::nullopt);

    ErrorKind kind() const noexcept { return kind_; }
    std::optional<double> where() const noexcept { return where_; }

private:
    ErrorKind kind_;
    std::optional<double> where_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message,
                       std::optional<double> where = std::nullopt);

}  // namespace riccati
