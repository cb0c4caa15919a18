#pragma once

#include <stdexcept>
#include <string>

namespace ppac {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. |y| > 1 for an inverse sigmoid).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested a derivative order the performance function does not provide.
class UnsupportedDerivativeOrder : public Error {
 public:
  using Error::Error;
};

/// The state left (or touched the boundary of) the performance funnel.
class FunnelViolation : public Error {
 public:
  FunnelViolation(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Unknown seed or incompatible jet level stacks.
class RegistryError : public Error {
 public:
  using Error::Error;
};

/// Hadamard factorization residual above tolerance even after node escalation.
class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// A parameter signal left its declared bounds (Assumptions on theta(t), b(t)).
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

/// Constructor guard failed (non-positive gain, inconsistent dimensions, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace ppac
