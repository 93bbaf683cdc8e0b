#pragma once

#include <stdexcept>
#include <string>

namespace gindex {

enum class ErrorKind {
  InvalidParameter,
  NearZeroValue,
  UnresolvedWinding,
  DivisionNearZero,
  GridMismatch,
  NotADiffeo,
  WindowTooSmall,
  WindowMismatch,
  WindowTooSmallForH,
  GroupMismatch,
  UnsupportedGroup,
  NotElliptic,
  NeumannDivergence,
  NoSpectralGap,
  NonStabilized,
  NoHomomorphism,
  NonIsometricAction,
  OrderOverflow,
  TraceDivergence,
  IllConditionedFit,
  ResidualNotTraceClass,
  ParseError,
  SchemaError,
  IoError,
};

const char* to_string(ErrorKind kind) noexcept;

// Every failure in the library is reported through this type; `kind()` is the
// machine-readable tag, `what()` carries "<Kind>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace gindex
