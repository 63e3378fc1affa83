#pragma once

#include <stdexcept>
#include <string>

namespace geomphase {

enum class ErrorCode {
  InvalidArgument,
  NonHermitianInput,
  GapTooSmall,
  IndexOutOfRange,
  InvalidAmplitudes,
  StepTooLarge,
  GridTooCoarse,
  OrthogonalNeighbors,
  NonFinite,
  DimensionMismatch,
  AntipodalEndpoints,
  NotClosed,
  TooCoarse,
  InvalidGamma,
  Io,
  Config,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace geomphase
