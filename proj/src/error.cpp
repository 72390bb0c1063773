#include "burstcast/error.hpp"

namespace burstcast {

std::string_view error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::MissingHeaderField: return "MissingHeaderField";
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::WidthMismatch: return "WidthMismatch";
    case ErrorKind::InvalidFactor: return "InvalidFactor";
    case ErrorKind::InvalidBinWidth: return "InvalidBinWidth";
    case ErrorKind::TooFewBins: return "TooFewBins";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::InvalidFraction: return "InvalidFraction";
    case ErrorKind::InvalidBandConfig: return "InvalidBandConfig";
    case ErrorKind::InvalidAlpha: return "InvalidAlpha";
    case ErrorKind::InvalidMacdConfig: return "InvalidMacdConfig";
    case ErrorKind::UnknownFeatureSet: return "UnknownFeatureSet";
    case ErrorKind::HorizonTooLong: return "HorizonTooLong";
    case ErrorKind::InvalidHorizon: return "InvalidHorizon";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::SingleClassTrainSet: return "SingleClassTrainSet";
    case ErrorKind::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::InvalidHyperparams: return "InvalidHyperparams";
    case ErrorKind::EmptyGrid: return "EmptyGrid";
    case ErrorKind::InvalidProfile: return "InvalidProfile";
    case ErrorKind::InvalidPattern: return "InvalidPattern";
    case ErrorKind::PatternTooShort: return "PatternTooShort";
    case ErrorKind::UnwritableDirectory: return "UnwritableDirectory";
    case ErrorKind::InfeasibleSchedule: return "InfeasibleSchedule";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::SchemaMismatch: return "SchemaMismatch";
    case ErrorKind::ConfigHashMismatch: return "ConfigHashMismatch";
    case ErrorKind::LockHeld: return "LockHeld";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace burstcast
