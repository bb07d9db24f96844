#include "grb/error.hpp"

namespace grb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DuplicateAdd: return "DuplicateAdd";
    case ErrorCode::MissingRemove: return "MissingRemove";
    case ErrorCode::SelfLoopForbidden: return "SelfLoopForbidden";
    case ErrorCode::InvalidTarget: return "InvalidTarget";
    case ErrorCode::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorCode::InvalidNode: return "InvalidNode";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::FractionOverflow: return "FractionOverflow";
    case ErrorCode::UnknownDataset: return "UnknownDataset";
    case ErrorCode::NonScalarLoss: return "NonScalarLoss";
    case ErrorCode::Diverged: return "Diverged";
    case ErrorCode::EmptyTrainSet: return "EmptyTrainSet";
    case ErrorCode::RankTooLarge: return "RankTooLarge";
    case ErrorCode::GradientUnavailable: return "GradientUnavailable";
    case ErrorCode::TooLargeForDense: return "TooLargeForDense";
    case ErrorCode::InvalidBudget: return "InvalidBudget";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::IoFailure:
    case ErrorCode::Diverged:
    case ErrorCode::GradientUnavailable:
      return false;
    default:
      return true;
  }
}

}  // namespace grb
