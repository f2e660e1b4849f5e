#ifndef OPSCALE_ERRORS_H
#define OPSCALE_ERRORS_H

#include <stdexcept>
#include <string>

namespace opscale {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A matrix that should lie in the PD cone failed its Cholesky factorization.
class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

// Sum of Gramians singular, or a frame too small to span the space.
class AssumptionViolated : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InsufficientHistory : public Error {
 public:
  using Error::Error;
};

class DimensionTooLarge : public Error {
 public:
  using Error::Error;
};

class NotConverged : public Error {
 public:
  using Error::Error;
};

class Singular : public Error {
 public:
  using Error::Error;
};

}  // namespace opscale

#endif  // OPSCALE_ERRORS_H
