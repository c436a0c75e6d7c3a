#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace toa {

/// Failure categories shared by every module. The CLI maps these onto exit
/// codes, so new kinds must be added to `exit_code_for` as well.
enum class ErrorKind {
  InvalidArgument,
  GridTooSmall,
  ZeroNorm,
  NonFinite,
  DegenerateChannel,
  InvalidRegime,
  StabilityViolation,
  WrapAround,
  SliceCountInsufficient,
  PrematureReadout,
  EmptyReadout,
  SupportViolation,
  WindowTooSmall,
  Aliasing,
  Resolution,
  Config,
};

std::string_view to_string(ErrorKind kind);

/// Process exit status for a run aborted by `kind`: 2 for configuration and
/// precondition failures, 3 for numerical-stability aborts.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace toa
