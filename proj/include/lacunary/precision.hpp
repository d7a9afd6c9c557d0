#pragma once

// Arbitrary-precision real/complex arithmetic and the overflow-safe
// (log-modulus, argument) representation used by every other module.
//
// Precision is counted in decimal digits. The working precision is a
// process-wide setting managed by WorkingPrecision; every library entry point
// that takes a configuration pins the precision to the configuration's value.

#include <boost/multiprecision/mpfr.hpp>

#include <complex>
#include <string>

#include "lacunary/errors.hpp"

namespace lacunary {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

inline constexpr unsigned kMinDigits = 30;
inline constexpr unsigned kDefaultDigits = 100;

/// Current working precision in decimal digits.
unsigned working_digits();

/// RAII scope that sets the working precision and restores the previous one.
class WorkingPrecision {
 public:
  explicit WorkingPrecision(unsigned digits);
  ~WorkingPrecision();
  WorkingPrecision(const WorkingPrecision&) = delete;
  WorkingPrecision& operator=(const WorkingPrecision&) = delete;

 private:
  unsigned saved_;
};

unsigned digits_of(const Real& x);
Real round_to(const Real& x, unsigned digits);

Real pi_value();
Real two_pi();
Real ln10();
Real neg_infinity();
bool is_neg_inf(const Real& x);

/// Reduces an angle into (-pi, pi].
Real reduce_angle(const Real& angle);

/// reduce_angle(factor * angle), computed with enough guard digits that the
/// result keeps full precision when factor is huge. `angle` is taken as exact.
Real scaled_angle(const Real& angle, const Real& factor);

double to_double(const Real& x);
std::string to_string(const Real& x, int significant_digits);
Real parse_real(const std::string& text);

/// Complex number with real and imaginary parts at a fixed decimal precision.
/// Binary operations round their result to the smaller operand precision.
class PrecComplex {
 public:
  PrecComplex();
  PrecComplex(const Real& re, const Real& im);
  PrecComplex(const Real& re);  // NOLINT(google-explicit-constructor)
  PrecComplex(double re, double im = 0.0);  // NOLINT(google-explicit-constructor)

  static PrecComplex polar(const Real& modulus, const Real& angle);

  const Real& re() const { return re_; }
  const Real& im() const { return im_; }
  unsigned digits() const;

  Real abs() const;
  Real norm() const;
  /// Principal argument in (-pi, pi]; 0 for zero.
  Real arg() const;
  PrecComplex conj() const;
  bool is_zero() const;
  PrecComplex rounded(unsigned digits) const;
  std::complex<double> to_std() const;

  PrecComplex operator-() const;
  PrecComplex& operator+=(const PrecComplex& o);
  PrecComplex& operator-=(const PrecComplex& o);
  PrecComplex& operator*=(const PrecComplex& o);
  PrecComplex& operator/=(const PrecComplex& o);

  friend PrecComplex operator+(PrecComplex a, const PrecComplex& b) { return a += b; }
  friend PrecComplex operator-(PrecComplex a, const PrecComplex& b) { return a -= b; }
  friend PrecComplex operator*(PrecComplex a, const PrecComplex& b) { return a *= b; }
  friend PrecComplex operator/(PrecComplex a, const PrecComplex& b) { return a /= b; }
  friend PrecComplex operator*(PrecComplex a, const Real& s);
  friend PrecComplex operator*(const Real& s, PrecComplex a) { return std::move(a) * s; }
  friend PrecComplex operator/(PrecComplex a, const Real& s);

 private:
  void check_finite() const;
  Real re_;
  Real im_;
};

PrecComplex exp(const PrecComplex& z);
PrecComplex sqr(const PrecComplex& z);

/// Complex value stored as (natural log of modulus, principal argument).
/// logmag == -inf encodes an exact zero (with arg 0).
struct LogComplex {
  Real logmag;
  Real arg;

  static LogComplex zero();
  static LogComplex one();
  bool is_zero() const { return is_neg_inf(logmag); }
};

LogComplex log_from_value(const PrecComplex& w);

/// Inverse of log_from_value. Throws OverflowError beyond the exponent range.
PrecComplex to_value(const LogComplex& a);

LogComplex log_mul(const LogComplex& a, const LogComplex& b);
LogComplex log_div(const LogComplex& a, const LogComplex& b);
LogComplex log_neg(const LogComplex& a);
/// a^n for real n (principal branch): logmag*n, arg*n reduced with guard digits.
LogComplex log_pow(const LogComplex& a, const Real& n);

struct LogSum {
  LogComplex value;
  bool absorbed = false;   ///< smaller operand below 10^-P relative, dropped
  bool cancelled = false;  ///< result indistinguishable from zero at precision P
  double digits_lost = 0.0;
};

/// a + b computed by factoring out the larger modulus. A total cancellation
/// (more than P-5 digits lost) yields an exact zero with `cancelled` set.
LogSum log_add(const LogComplex& a, const LogComplex& b);

/// As log_add but throws CancellationError instead of returning a flagged zero.
LogComplex log_add_strict(const LogComplex& a, const LogComplex& b);

/// log(1 - a), the building block of every canonical-product factor.
LogSum log_one_minus(const LogComplex& a);

}  // namespace lacunary
