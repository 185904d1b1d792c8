#include "riccati/error.hpp"

#include <sstream>

namespace riccati {

std::string_view to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidGrid: return "InvalidGrid";
    case ErrorKind::PoleEncountered: return "PoleEncountered";
    case ErrorKind::DegenerateToLine: return "DegenerateToLine";
    case ErrorKind::NotImaginary: return "NotImaginary";
    case ErrorKind::ZeroPotential: return "ZeroPotential";
    case ErrorKind::SeriesNotConverged: return "SeriesNotConverged";
    case ErrorKind::ZeroWavefunction: return "ZeroWavefunction";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::ZeroCrossing: return "ZeroCrossing";
    case ErrorKind::NegativeRadius: return "NegativeRadius";
    case ErrorKind::ConsistencyViolated: return "ConsistencyViolated";
    case ErrorKind::SignViolation: return "SignViolation";
    case ErrorKind::PolicyExhausted: return "PolicyExhausted";
    case ErrorKind::JumpImpossible: return "JumpImpossible";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::CalibrationFailed: return "CalibrationFailed";
    case ErrorKind::ConstraintViolated: return "ConstraintViolated";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, std::optional<double> where)
{
    std::ostringstream os;
    os << to_string(kind) << ": " << message;
    if (where) {
        os.precision(15);
        os << " (at x = " << *where << ")";
    }
    return os.str();
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::optional<double> where)
    : std::runtime_error(compose(kind, message, where)), kind_(kind), where_(where)
{
}

void fail(ErrorKind kind, const std::string& message, std::optional<double> where)
{
    throw Error(kind, message, where);
}

}  // namespace riccati
