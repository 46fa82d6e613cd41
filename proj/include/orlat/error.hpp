#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace orlat {

enum class ErrorCode {
  NonNormalized,
  NegativeSupport,
  AllMassAtZero,
  EmptyLaw,
  InvalidSegment,
  QuadratureNonConvergence,
  SubcriticalRate,
  NoConvergence,
  BadGrid,
  OutOfSupport,
  DimensionMismatch,
  MixedNormInitialSet,
  DimensionTooSmall,
  NormOrderViolated,
  InconsistentRecord,
  BadArguments,
  ConfigInvalid,
  IoFailure,
  RateDrift,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (CLI, Python bindings) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace orlat
