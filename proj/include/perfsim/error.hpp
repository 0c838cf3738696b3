#pragma once

#include <stdexcept>
#include <string>

namespace perfsim {

enum class Errc {
    DimensionMismatch,
    FractionSumInvalid,
    EmptyGroup,
    IncompatibleModel,
    DimensionUnsupported,
    NonDifferentiableFamily,
    WeightMismatch,
    TooManyGroups,
    NegativeRadius,
    NoCertificate,
    GroupCountMismatch,
    BadTransitionParams,
    InvalidEpsilon,
    DegenerateProbe,
    NotOneDimensional,
    NotBinaryLabels,
    DidNotConverge,
    TooShort,
    SingleGroup,
    NotAFixedPoint,
    NotConverged,
    ParseError,
    ValidationError,
    FileNotFound,
    BadColumn,
    NonNumericFeature,
};

const char* errc_name(Errc c);

/// Exception carrying a stable error code alongside the human message.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

}  // namespace perfsim
