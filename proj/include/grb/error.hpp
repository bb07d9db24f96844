#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace grb {

enum class ErrorCode {
  // graph-core
  MissingFile,
  ShapeMismatch,
  LabelOutOfRange,
  IoFailure,
  DuplicateAdd,
  MissingRemove,
  SelfLoopForbidden,
  InvalidTarget,
  EmptyNeighborhood,
  InvalidNode,
  // data-prep
  ZeroVariance,
  TooSmall,
  FractionOverflow,
  UnknownDataset,
  // diff-engine
  NonScalarLoss,
  // training / defenses
  Diverged,
  EmptyTrainSet,
  RankTooLarge,
  // attacks
  GradientUnavailable,
  TooLargeForDense,
  InvalidBudget,
  // eval
  EmptyMask,
  // generic
  InvalidArgument,
  FormatError,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad input data or configuration (as opposed to
/// failures that happen while running a valid job).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace grb
