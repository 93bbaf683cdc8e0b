#include "gindex/error.hpp"

namespace gindex {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::NearZeroValue: return "NearZeroValue";
    case ErrorKind::UnresolvedWinding: return "UnresolvedWinding";
    case ErrorKind::DivisionNearZero: return "DivisionNearZero";
    case ErrorKind::GridMismatch: return "GridMismatch";
    case ErrorKind::NotADiffeo: return "NotADiffeo";
    case ErrorKind::WindowTooSmall: return "WindowTooSmall";
    case ErrorKind::WindowMismatch: return "WindowMismatch";
    case ErrorKind::WindowTooSmallForH: return "WindowTooSmallForH";
    case ErrorKind::GroupMismatch: return "GroupMismatch";
    case ErrorKind::UnsupportedGroup: return "UnsupportedGroup";
    case ErrorKind::NotElliptic: return "NotElliptic";
    case ErrorKind::NeumannDivergence: return "NeumannDivergence";
    case ErrorKind::NoSpectralGap: return "NoSpectralGap";
    case ErrorKind::NonStabilized: return "NonStabilized";
    case ErrorKind::NoHomomorphism: return "NoHomomorphism";
    case ErrorKind::NonIsometricAction: return "NonIsometricAction";
    case ErrorKind::OrderOverflow: return "OrderOverflow";
    case ErrorKind::TraceDivergence: return "TraceDivergence";
    case ErrorKind::IllConditionedFit: return "IllConditionedFit";
    case ErrorKind::ResidualNotTraceClass: return "ResidualNotTraceClass";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
      kind_(kind),
      detail_(detail) {}

}  // namespace gindex
