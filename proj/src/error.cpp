#include "perfsim/error.hpp"

namespace perfsim {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::DimensionMismatch: return "DimensionMismatch";
        case Errc::FractionSumInvalid: return "FractionSumInvalid";
        case Errc::EmptyGroup: return "EmptyGroup";
        case Errc::IncompatibleModel: return "IncompatibleModel";
        case Errc::DimensionUnsupported: return "DimensionUnsupported";
        case Errc::NonDifferentiableFamily: return "NonDifferentiableFamily";
        case Errc::WeightMismatch: return "WeightMismatch";
        case Errc::TooManyGroups: return "TooManyGroups";
        case Errc::NegativeRadius: return "NegativeRadius";
        case Errc::NoCertificate: return "NoCertificate";
        case Errc::GroupCountMismatch: return "GroupCountMismatch";
        case Errc::BadTransitionParams: return "BadTransitionParams";
        case Errc::InvalidEpsilon: return "InvalidEpsilon";
        case Errc::DegenerateProbe: return "DegenerateProbe";
        case Errc::NotOneDimensional: return "NotOneDimensional";
        case Errc::NotBinaryLabels: return "NotBinaryLabels";
        case Errc::DidNotConverge: return "DidNotConverge";
        case Errc::TooShort: return "TooShort";
        case Errc::SingleGroup: return "SingleGroup";
        case Errc::NotAFixedPoint: return "NotAFixedPoint";
        case Errc::NotConverged: return "NotConverged";
        case Errc::ParseError: return "ParseError";
        case Errc::ValidationError: return "ValidationError";
        case Errc::FileNotFound: return "FileNotFound";
        case Errc::BadColumn: return "BadColumn";
        case Errc::NonNumericFeature: return "NonNumericFeature";
    }
    return "UnknownError";
}

}  // namespace perfsim
