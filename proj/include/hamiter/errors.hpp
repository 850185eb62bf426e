#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hamiter {

enum class Errc {
  InvalidArgument,
  NotSymplectic,
  ClusterAmbiguous,
  NotAdmissible,
  SplitFailed,
  WindingUnresolved,
  DegenerateEndpoint,
  NotALoop,
  LeftDomain,
  StepFailure,
  NotClosed,
  NewtonDivergence,
  NotInvertibleOnBox,
  NotC1Small,
  ClosednessDefect,
  CriticalValueInWindow,
  NotStabilized,
  NotIsolated,
  RouteUnavailable,
  HypothesisFailed,
  ShiftAmbiguous,
  LinearizationNotIdentity,
  ParseError,
  UnknownFormula,
  MissingReport,
};

std::string_view to_string(Errc code);

// Every failure in the library is reported through this type; `code()` is the
// machine-readable part, `what()` carries context.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hamiter
