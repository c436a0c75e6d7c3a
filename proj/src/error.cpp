#include "toa/error.hpp"

namespace toa {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::GridTooSmall: return "grid-too-small";
    case ErrorKind::ZeroNorm: return "zero-norm";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::DegenerateChannel: return "degenerate-channel";
    case ErrorKind::InvalidRegime: return "invalid-regime";
    case ErrorKind::StabilityViolation: return "stability-violation";
    case ErrorKind::WrapAround: return "wrap-around";
    case ErrorKind::SliceCountInsufficient: return "slice-count-insufficient";
    case ErrorKind::PrematureReadout: return "premature-readout";
    case ErrorKind::EmptyReadout: return "empty-readout";
    case ErrorKind::SupportViolation: return "support-violation";
    case ErrorKind::WindowTooSmall: return "window-too-small";
    case ErrorKind::Aliasing: return "aliasing";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::StabilityViolation:
    case ErrorKind::WrapAround:
    case ErrorKind::NonFinite:
    case ErrorKind::PrematureReadout:
    case ErrorKind::EmptyReadout:
      return 3;
    case ErrorKind::InvalidArgument:
    case ErrorKind::GridTooSmall:
    case ErrorKind::ZeroNorm:
    case ErrorKind::DegenerateChannel:
    case ErrorKind::InvalidRegime:
    case ErrorKind::SliceCountInsufficient:
    case ErrorKind::SupportViolation:
    case ErrorKind::WindowTooSmall:
    case ErrorKind::Aliasing:
    case ErrorKind::Resolution:
    case ErrorKind::Config:
      return 2;
  }
  return 2;
}

}  // namespace toa
