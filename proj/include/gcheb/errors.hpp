#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace gcheb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when |f_m(1/lambda1)| underflows inside the coefficient stream.
class DegenerateCoefficient : public Error {
 public:
  using Error::Error;
};

class Divergence : public Error {
 public:
  using Error::Error;
};

class MissingTildeData : public Error {
 public:
  using Error::Error;
};

class MissingLambda1 : public Error {
 public:
  using Error::Error;
};

class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

class NotUniqueDominant : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// Power iteration did not reach the requested residual. Carries the last
/// estimate so callers can still inspect it.
class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, std::complex<double> estimate, double residual)
      : Error(what), estimate_(estimate), residual_(residual) {}

  std::complex<double> estimate() const { return estimate_; }
  double residual() const { return residual_; }

 private:
  std::complex<double> estimate_;
  double residual_;
};

class FixtureCorrupt : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class UnreadableMatrix : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace gcheb
