#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace stepbunch {

// Base class for every error raised by the library. The CLI maps the two
// families below onto distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid input: out-of-range parameters, malformed configuration, size
// mismatches, infeasible profiles.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InfeasibleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Grid too coarse to resolve the requested bunch width.
class ResolutionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Evaluation at a pole or singular point (zeta(1), K_m(0) for m >= 0).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Something went wrong while computing: non-finite energy, step crossing,
// vacuum formation, Newton failure.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class SurfaceInversionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TopologyError : public NumericalError {
 public:
  TopologyError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Continuum evolution produced rho <= 0 (vacuum formation).
class DegenerateSlopeError : public NumericalError {
 public:
  DegenerateSlopeError(const std::string& what, double time)
      : NumericalError(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// Non-finite energy during minimization; carries the offending iterate.
class NonFiniteEnergyError : public NumericalError {
 public:
  NonFiniteEnergyError(const std::string& what, std::vector<double> iterate)
      : NumericalError(what), iterate_(std::move(iterate)) {}
  const std::vector<double>& iterate() const { return iterate_; }

 private:
  std::vector<double> iterate_;
};

}  // namespace stepbunch
