#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbf {

/// Domain error codes shared by every module. The CLI maps them onto exit codes.
enum class Errc {
    // numkernel
    NotPositiveDefinite,
    InvalidDof,
    DimensionMismatch,
    NonFiniteInput,
    // modelcore
    EmptyGroup,
    InvalidBatch,
    SingularDesign,
    InsufficientData,
    FractionExceedsOne,
    SingularFractionalDesign,
    SingularFractionalScatter,
    SingularConditioningBlock,
    // constraintlang
    SyntaxError,
    UnknownParameter,
    InconsistentConstraints,
    DegenerateTransform,
    // evidence
    NotSingleColumn,
    OverlappingRegions,
    UnresolvedComplement,
    InvalidConfig,
    // updating
    ChecksumMismatch,
    VersionUnsupported,
    SchemaMismatch,
    UnknownGroup,
    StaleLock,
    LockHeld,
    Io,
    // missing
    TooFewCompleteCases,
    MissingInCovariates,
    MaskMismatch,
    // cli
    UnknownColumn,
};

std::string_view to_string(Errc code) noexcept;

/// Module that raised an error; reported alongside the cause.
std::string_view module_of(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace cbf
