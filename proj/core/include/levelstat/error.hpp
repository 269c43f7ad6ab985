#pragma once

#include <stdexcept>
#include <string>

namespace levelstat {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data failed (bad site index, empty set, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Input lies outside the domain of a closed-form expression.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Eigensolver, quadrature or root search failed to reach its tolerance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An operation that needs a simple eigenvalue met a (near-)degenerate one.
class DegenerateSpectrum : public Error {
 public:
  using Error::Error;
};

/// A hard mathematical bound was exceeded (e.g. more than n! isolated roots).
class BoundViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace levelstat
