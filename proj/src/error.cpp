#include "geomphase/error.hpp"

namespace geomphase {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::GapTooSmall: return "GapTooSmall";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::InvalidAmplitudes: return "InvalidAmplitudes";
    case ErrorCode::StepTooLarge: return "StepTooLarge";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::OrthogonalNeighbors: return "OrthogonalNeighbors";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::AntipodalEndpoints: return "AntipodalEndpoints";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::TooCoarse: return "TooCoarse";
    case ErrorCode::InvalidGamma: return "InvalidGamma";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace geomphase
