#pragma once

#include <stdexcept>
#include <string>

namespace nouk {

enum class ErrorKind {
    Parse,
    Validation,
    DegenerateDiffusion,
    UnsupportedOrder,
    IntegratorFailure,
    NotSmoothing,
    RangeError,
    RankDeficient,
    KernelComponent,
    NotSeparable,
    MethodUnavailable,
    DivergentSingularity,
    DegenerateFit,
    UnsupportedFunction,
    Internal,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library. `index()` carries a 1-based mode,
/// eigen-index or config line when the error names one, otherwise 0.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message, int index = 0);

    ErrorKind kind() const noexcept { return kind_; }
    int index() const noexcept { return index_; }

    /// Configuration problems (exit code 2) vs numerical failures (exit code 3).
    bool is_config_error() const noexcept;

private:
    ErrorKind kind_;
    int index_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message, int index = 0);

}  // namespace nouk
