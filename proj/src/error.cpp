#include "orlat/error.hpp"

namespace orlat {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NonNormalized: return "NonNormalized";
    case ErrorCode::NegativeSupport: return "NegativeSupport";
    case ErrorCode::AllMassAtZero: return "AllMassAtZero";
    case ErrorCode::EmptyLaw: return "EmptyLaw";
    case ErrorCode::InvalidSegment: return "InvalidSegment";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::SubcriticalRate: return "SubcriticalRate";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadGrid: return "BadGrid";
    case ErrorCode::OutOfSupport: return "OutOfSupport";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MixedNormInitialSet: return "MixedNormInitialSet";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::NormOrderViolated: return "NormOrderViolated";
    case ErrorCode::InconsistentRecord: return "InconsistentRecord";
    case ErrorCode::BadArguments: return "BadArguments";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::RateDrift: return "RateDrift";
  }
  return "Unknown";
}

}  // namespace orlat
