#pragma once

#include <stdexcept>
#include <string>

namespace hmf {

// Argument outside the mathematical domain of a routine.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Result not representable (overflow).
struct RangeError : std::range_error {
  using std::range_error::range_error;
};

// Iteration or quadrature that failed to reach its tolerance.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DivergenceError : NumericError {
  using NumericError::NumericError;
};

struct SeparatrixError : DomainError {
  SeparatrixError(const std::string& what, double distance)
      : DomainError(what), distance(distance) {}
  double distance;
};

struct ResonanceError : NumericError {
  ResonanceError(const std::string& what, int ell, double h)
      : NumericError(what), ell(ell), h(h) {}
  int ell;
  double h;
};

struct StabilityError : NumericError {
  using NumericError::NumericError;
};

struct TruncationError : NumericError {
  using NumericError::NumericError;
};

// Orthogonal projection onto a degenerate reference direction.
struct ProjectionError : NumericError {
  using NumericError::NumericError;
};

// An experiment started without the result it depends on (e.g. a failed damping run).
struct PreconditionError : NumericError {
  using NumericError::NumericError;
};

// API used in a way that cannot produce a meaningful answer.
struct MisuseError : std::logic_error {
  using std::logic_error::logic_error;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace hmf
