#include "cgst/types.hpp"

namespace cgst {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::QuadratureFailure: return "quadrature-failure";
    case ErrorKind::NonphysicalParameter: return "nonphysical-parameter";
    case ErrorKind::InconsistentArea: return "inconsistent-area";
    case ErrorKind::LengthMismatch: return "length-mismatch";
    case ErrorKind::DegenerateDesign: return "degenerate-design";
    case ErrorKind::RankDeficient: return "rank-deficient";
    case ErrorKind::SingularGram: return "singular-gram";
    case ErrorKind::OptimizationFailure: return "optimization-failure";
    case ErrorKind::InvalidConfig: return "invalid-config";
    case ErrorKind::Parse: return "parse-error";
  }
  return "error";
}

}  // namespace cgst
