#pragma once

#include <stdexcept>
#include <string>

namespace invsub {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter or argument lies outside the admissible domain.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A quadrature or series did not reach the requested accuracy.
class AccuracyError : public Error {
public:
  AccuracyError(const std::string& what, double residual)
      : Error(what + " (residual estimate " + std::to_string(residual) + ")"),
        residual_(residual) {}

  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// A value would leave the range of binary64 arithmetic.
class OverflowError : public Error {
public:
  OverflowError(const std::string& what, double log_magnitude)
      : Error(what + " (log magnitude " + std::to_string(log_magnitude) + ")"),
        log_magnitude_(log_magnitude) {}

  double log_magnitude() const noexcept { return log_magnitude_; }

private:
  double log_magnitude_;
};

/// A family is not supported by the requested operation.
class UnsupportedError : public Error {
public:
  using Error::Error;
};

/// Output could not be written.
class IoError : public Error {
public:
  using Error::Error;
};

} // namespace invsub
