#pragma once

#include <stdexcept>
#include <string>

namespace phflow {

enum class ErrorKind {
  invalid_input,
  unsupported_dimension,
  structural,
  invalid_degree,
  convergence,
  too_large,
  degenerate_plan,
  shape,
  provenance,
  divergence,
  config,
  empty_diagram,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::unsupported_dimension: return "unsupported-dimension";
    case ErrorKind::structural: return "structural";
    case ErrorKind::invalid_degree: return "invalid-degree";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::too_large: return "too-large";
    case ErrorKind::degenerate_plan: return "degenerate-plan";
    case ErrorKind::shape: return "shape";
    case ErrorKind::provenance: return "provenance";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::config: return "config";
    case ErrorKind::empty_diagram: return "empty-diagram";
    case ErrorKind::io: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the kinds above.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Sinkhorn did not reach the marginal tolerance within its iteration cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& message, double marginal_violation)
      : Error(ErrorKind::convergence, message), violation_(marginal_violation) {}

  double marginal_violation() const noexcept { return violation_; }

 private:
  double violation_;
};

}  // namespace phflow
