#include "geoflow/error.hpp"

namespace geoflow {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateGeometry: return "degenerate-geometry";
    case ErrorKind::StepSize: return "step-size";
    case ErrorKind::ExtinctionImminent: return "extinction-imminent";
    case ErrorKind::BlowUp: return "blow-up";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Positivity: return "positivity";
    case ErrorKind::Matching: return "matching";
    case ErrorKind::Bias: return "bias";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::Contract: return "contract";
    case ErrorKind::Quadrature: return "quadrature";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

}  // namespace geoflow
