#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace billiards {

enum class ErrorCode {
    NonConvex,
    NotClosed,
    ResamplingFailure,
    SolveFailure,
    NotFound,
    Continuum,
    NotElliptic,
    Resonant,
    NotResonant,
    Degenerate,
    Inadmissible,
    NotDiffeo,
    MarginUnreachable,
    SeriesSolveFailure,
    InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers dispatch on code().
class BilliardError : public std::runtime_error {
public:
    BilliardError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw BilliardError(code, what);
}

}  // namespace billiards
