#include "cbf/error.hpp"

namespace cbf {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::InvalidDof: return "InvalidDof";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::EmptyGroup: return "EmptyGroup";
    case Errc::InvalidBatch: return "InvalidBatch";
    case Errc::SingularDesign: return "SingularDesign";
    case Errc::InsufficientData: return "InsufficientData";
    case Errc::FractionExceedsOne: return "FractionExceedsOne";
    case Errc::SingularFractionalDesign: return "SingularFractionalDesign";
    case Errc::SingularFractionalScatter: return "SingularFractionalScatter";
    case Errc::SingularConditioningBlock: return "SingularConditioningBlock";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::UnknownParameter: return "UnknownParameter";
    case Errc::InconsistentConstraints: return "InconsistentConstraints";
    case Errc::DegenerateTransform: return "DegenerateTransform";
    case Errc::NotSingleColumn: return "NotSingleColumn";
    case Errc::OverlappingRegions: return "OverlappingRegions";
    case Errc::UnresolvedComplement: return "UnresolvedComplement";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::ChecksumMismatch: return "ChecksumMismatch";
    case Errc::VersionUnsupported: return "VersionUnsupported";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::UnknownGroup: return "UnknownGroup";
    case Errc::StaleLock: return "StaleLock";
    case Errc::LockHeld: return "LockHeld";
    case Errc::Io: return "Io";
    case Errc::TooFewCompleteCases: return "TooFewCompleteCases";
    case Errc::MissingInCovariates: return "MissingInCovariates";
    case Errc::MaskMismatch: return "MaskMismatch";
    case Errc::UnknownColumn: return "UnknownColumn";
    }
    return "Unknown";
}

std::string_view module_of(Errc code) noexcept {
    switch (code) {
    case Errc::NotPositiveDefinite:
    case Errc::InvalidDof:
    case Errc::DimensionMismatch:
    case Errc::NonFiniteInput:
        return "numkernel";
    case Errc::EmptyGroup:
    case Errc::InvalidBatch:
    case Errc::SingularDesign:
    case Errc::InsufficientData:
    case Errc::FractionExceedsOne:
    case Errc::SingularFractionalDesign:
    case Errc::SingularFractionalScatter:
    case Errc::SingularConditioningBlock:
        return "modelcore";
    case Errc::SyntaxError:
    case Errc::UnknownParameter:
    case Errc::InconsistentConstraints:
    case Errc::DegenerateTransform:
        return "constraintlang";
    case Errc::NotSingleColumn:
    case Errc::OverlappingRegions:
    case Errc::UnresolvedComplement:
    case Errc::InvalidConfig:
        return "evidence";
    case Errc::ChecksumMismatch:
    case Errc::VersionUnsupported:
    case Errc::SchemaMismatch:
    case Errc::UnknownGroup:
    case Errc::StaleLock:
    case Errc::LockHeld:
    case Errc::Io:
        return "updating";
    case Errc::TooFewCompleteCases:
    case Errc::MissingInCovariates:
    case Errc::MaskMismatch:
        return "missing";
    case Errc::UnknownColumn:
        return "cli";
    }
    return "unknown";
}

} // namespace cbf
