#include "nouk/error.hpp"

namespace nouk {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Validation: return "ValidationError";
    case ErrorKind::DegenerateDiffusion: return "DegenerateDiffusion";
    case ErrorKind::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorKind::IntegratorFailure: return "IntegratorFailure";
    case ErrorKind::NotSmoothing: return "NotSmoothing";
    case ErrorKind::RangeError: return "RangeError";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::KernelComponent: return "KernelComponent";
    case ErrorKind::NotSeparable: return "NotSeparable";
    case ErrorKind::MethodUnavailable: return "MethodUnavailable";
    case ErrorKind::DivergentSingularity: return "DivergentSingularity";
    case ErrorKind::DegenerateFit: return "DegenerateFit";
    case ErrorKind::UnsupportedFunction: return "UnsupportedFunction";
    case ErrorKind::Internal: return "InternalError";
    }
    return "Error";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, int index)
{
    std::string out = to_string(kind);
    if (kind == ErrorKind::Parse && index > 0) {
        out += " (line " + std::to_string(index) + ")";
    }
    return out + ": " + message;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, int index)
    : std::runtime_error(compose(kind, message, index)), kind_(kind), index_(index)
{
}

bool Error::is_config_error() const noexcept
{
    switch (kind_) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::DegenerateDiffusion:
    case ErrorKind::UnsupportedFunction:
        return true;
    default:
        return false;
    }
}

void fail(ErrorKind kind, const std::string& message, int index)
{
    throw Error(kind, message, index);
}

}  // namespace nouk
