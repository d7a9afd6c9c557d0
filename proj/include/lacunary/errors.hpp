#pragma once

#include <stdexcept>
#include <string>

namespace lacunary {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration (parameters out of range, invariants violated).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A sum lost more significant digits than the working precision holds.
class CancellationError : public Error {
 public:
  CancellationError(const std::string& what, double digits_lost)
      : Error(what), digits_lost_(digits_lost) {}
  double digits_lost() const noexcept { return digits_lost_; }

 private:
  double digits_lost_;
};

/// Evaluation point outside the domain where the truncation error is certified.
class TailError : public Error {
 public:
  using Error::Error;
};

/// Point too close to a zero of f for the logarithmic derivative.
class NearZeroError : public Error {
 public:
  using Error::Error;
};

/// Point too close to a pole of the rational series.
class NearPoleError : public Error {
 public:
  using Error::Error;
};

/// Adaptive quadrature hit its node cap without meeting the tolerance.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, double previous, double last)
      : Error(what), previous_(previous), last_(last) {}
  double previous() const noexcept { return previous_; }
  double last() const noexcept { return last_; }

 private:
  double previous_;
  double last_;
};

/// f' vanishes (numerically) on a contour that must be zero-free.
class ZeroOnContourError : public Error {
 public:
  using Error::Error;
};

/// Conversion of a log-domain value whose modulus exceeds the exponent range.
class OverflowError : public Error {
 public:
  using Error::Error;
};

}  // namespace lacunary
