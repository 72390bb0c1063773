#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace burstcast {

// Machine-parsable failure classes. The CLI prints the class name verbatim.
enum class ErrorKind {
  EmptyFile,
  MissingHeaderField,
  MalformedHeader,
  WidthMismatch,
  InvalidFactor,
  InvalidBinWidth,
  TooFewBins,
  ZeroVariance,
  InvalidFraction,
  InvalidBandConfig,
  InvalidAlpha,
  InvalidMacdConfig,
  UnknownFeatureSet,
  HorizonTooLong,
  InvalidHorizon,
  TooFewRows,
  SingleClassTrainSet,
  NonFiniteFeature,
  ArityMismatch,
  InvalidHyperparams,
  EmptyGrid,
  InvalidProfile,
  InvalidPattern,
  PatternTooShort,
  UnwritableDirectory,
  InfeasibleSchedule,
  InvalidConfig,
  MissingArtifact,
  SchemaMismatch,
  ConfigHashMismatch,
  LockHeld,
  IoError,
  ParseError,
};

std::string_view error_kind_name(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const noexcept { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace burstcast
