#pragma once

#include <stdexcept>
#include <string>

namespace delaycredit {

/// Error categories surfaced by the library. Each maps to one validation or
/// numerical failure mode; the CLI translates categories into exit codes.
enum class Errc {
    MissingColumn,
    MalformedRow,
    NonMonotoneYears,
    NObsTooSmall,
    NonPositiveValue,
    WindowNotCovered,
    TooFewKnots,
    DtNotAligned,
    SingularImplicitStep,
    NonFiniteValue,
    AllPathsExcluded,
    BadParameters,
    NonFiniteCoefficient,
    BreakdownNotConverged,
    LagOutOfMemory,
    LatticeMismatch,
    IoError,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace delaycredit
