#include "lacunary/precision.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <ios>
#include <mutex>

namespace lacunary {

namespace {

void widen_exponent_range() {
  static std::once_flag once;
  std::call_once(once, [] {
    mpfr_set_emax(mpfr_get_emax_max());
    mpfr_set_emin(mpfr_get_emin_min());
  });
}

// Natural log of the largest representable modulus, with a safety margin.
const double kMaxLogMag = 0.69 * static_cast<double>(mpfr_get_emax_max());

}  // namespace

unsigned working_digits() {
  widen_exponent_range();
  return Real::default_precision();
}

WorkingPrecision::WorkingPrecision(unsigned digits) : saved_(working_digits()) {
  if (digits < kMinDigits) {
    throw ConfigError("precision must be at least " + std::to_string(kMinDigits) +
                      " decimal digits, got " + std::to_string(digits));
  }
  Real::default_precision(digits);
}

WorkingPrecision::~WorkingPrecision() { Real::default_precision(saved_); }

unsigned digits_of(const Real& x) { return x.precision(); }

Real round_to(const Real& x, unsigned digits) {
  if (digits_of(x) == digits) return x;
  return Real(x, digits);
}

Real pi_value() {
  Real p;
  mpfr_const_pi(p.backend().data(), MPFR_RNDN);
  return p;
}

Real two_pi() { return 2 * pi_value(); }

Real ln10() {
  Real x;
  mpfr_set_ui(x.backend().data(), 10, MPFR_RNDN);
  mpfr_log(x.backend().data(), x.backend().data(), MPFR_RNDN);
  return x;
}

Real neg_infinity() {
  Real x;
  mpfr_set_inf(x.backend().data(), -1);
  return x;
}

bool is_neg_inf(const Real& x) {
  return mpfr_inf_p(x.backend().data()) != 0 && mpfr_sgn(x.backend().data()) < 0;
}

Real reduce_angle(const Real& angle) {
  WorkingPrecision guard(std::max(digits_of(angle), kMinDigits));
  const Real pi = pi_value();
  const Real tau = 2 * pi;
  Real r = angle;
  if (r > pi || r <= -pi) {
    Real k = r / tau;
    k = boost::multiprecision::round(k);
    r -= k * tau;
  }
  if (r <= -pi) r += tau;
  if (r > pi) r -= tau;
  return r;
}

Real scaled_angle(const Real& angle, const Real& factor) {
  const unsigned d = std::min(digits_of(angle), digits_of(factor));
  if (angle == 0 || factor == 0) return round_to(Real(0), d);
  const Real mag = boost::multiprecision::log10(boost::multiprecision::abs(factor) *
                                                std::max(Real(1), boost::multiprecision::abs(angle)));
  const unsigned guard_digits =
      static_cast<unsigned>(std::max(0.0, std::ceil(to_double(mag)))) + 10;
  const unsigned hi = std::max(digits_of(angle), digits_of(factor)) + guard_digits;
  WorkingPrecision guard(hi);
  const Real x = Real(angle, hi) * Real(factor, hi);
  return round_to(reduce_angle(x), d);
}

double to_double(const Real& x) { return x.convert_to<double>(); }

std::string to_string(const Real& x, int significant_digits) {
  if (is_neg_inf(x)) return "-inf";
  return x.str(significant_digits, std::ios_base::scientific);
}

Real parse_real(const std::string& text) { return Real(text); }

// ---------------------------------------------------------------------------
// PrecComplex

PrecComplex::PrecComplex() : re_(0), im_(0) { widen_exponent_range(); }

PrecComplex::PrecComplex(const Real& re, const Real& im) : re_(re), im_(im) {
  const unsigned d = std::min(digits_of(re_), digits_of(im_));
  re_ = round_to(re_, d);
  im_ = round_to(im_, d);
  check_finite();
}

PrecComplex::PrecComplex(const Real& re) : re_(re), im_(round_to(Real(0), digits_of(re))) {
  check_finite();
}

PrecComplex::PrecComplex(double re, double im) : re_(re), im_(im) {
  widen_exponent_range();
  check_finite();
}

PrecComplex PrecComplex::polar(const Real& modulus, const Real& angle) {
  if (modulus == 0) return PrecComplex(round_to(Real(0), digits_of(modulus)));
  return PrecComplex(modulus * boost::multiprecision::cos(angle),
                     modulus * boost::multiprecision::sin(angle));
}

unsigned PrecComplex::digits() const { return std::min(digits_of(re_), digits_of(im_)); }

Real PrecComplex::abs() const {
  Real r(0, digits());
  mpfr_hypot(r.backend().data(), re_.backend().data(), im_.backend().data(), MPFR_RNDN);
  return r;
}

Real PrecComplex::norm() const { return re_ * re_ + im_ * im_; }

Real PrecComplex::arg() const {
  if (is_zero()) return round_to(Real(0), digits());
  WorkingPrecision guard(std::max(digits(), kMinDigits));
  Real a = boost::multiprecision::atan2(im_, re_);
  if (a <= -pi_value()) a = pi_value();
  return a;
}

PrecComplex PrecComplex::conj() const { return PrecComplex(re_, -im_); }

bool PrecComplex::is_zero() const { return re_ == 0 && im_ == 0; }

PrecComplex PrecComplex::rounded(unsigned digits) const {
  return PrecComplex(Real(re_, digits), Real(im_, digits));
}

std::complex<double> PrecComplex::to_std() const { return {to_double(re_), to_double(im_)}; }

PrecComplex PrecComplex::operator-() const { return PrecComplex(-re_, -im_); }

PrecComplex& PrecComplex::operator+=(const PrecComplex& o) {
  const unsigned d = std::min(digits(), o.digits());
  re_ = round_to(re_ + o.re_, d);
  im_ = round_to(im_ + o.im_, d);
  return *this;
}

PrecComplex& PrecComplex::operator-=(const PrecComplex& o) {
  const unsigned d = std::min(digits(), o.digits());
  re_ = round_to(re_ - o.re_, d);
  im_ = round_to(im_ - o.im_, d);
  return *this;
}

PrecComplex& PrecComplex::operator*=(const PrecComplex& o) {
  const unsigned d = std::min(digits(), o.digits());
  Real re = re_ * o.re_ - im_ * o.im_;
  Real im = re_ * o.im_ + im_ * o.re_;
  re_ = round_to(re, d);
  im_ = round_to(im, d);
  check_finite();
  return *this;
}

PrecComplex& PrecComplex::operator/=(const PrecComplex& o) {
  if (o.is_zero()) throw Error("PrecComplex: division by zero");
  const unsigned d = std::min(digits(), o.digits());
  // Scale by the larger component of the divisor to stay clear of overflow.
  if (boost::multiprecision::abs(o.re_) >= boost::multiprecision::abs(o.im_)) {
    const Real t = o.im_ / o.re_;
    const Real den = o.re_ + o.im_ * t;
    Real re = (re_ + im_ * t) / den;
    Real im = (im_ - re_ * t) / den;
    re_ = round_to(re, d);
    im_ = round_to(im, d);
  } else {
    const Real t = o.re_ / o.im_;
    const Real den = o.re_ * t + o.im_;
    Real re = (re_ * t + im_) / den;
    Real im = (im_ * t - re_) / den;
    re_ = round_to(re, d);
    im_ = round_to(im, d);
  }
  check_finite();
  return *this;
}

PrecComplex operator*(PrecComplex a, const Real& s) {
  const unsigned d = std::min(a.digits(), digits_of(s));
  a.re_ = round_to(a.re_ * s, d);
  a.im_ = round_to(a.im_ * s, d);
  a.check_finite();
  return a;
}

PrecComplex operator/(PrecComplex a, const Real& s) {
  if (s == 0) throw Error("PrecComplex: division by zero");
  const unsigned d = std::min(a.digits(), digits_of(s));
  a.re_ = round_to(a.re_ / s, d);
  a.im_ = round_to(a.im_ / s, d);
  a.check_finite();
  return a;
}

void PrecComplex::check_finite() const {
  if (mpfr_number_p(re_.backend().data()) == 0 || mpfr_number_p(im_.backend().data()) == 0) {
    throw Error("PrecComplex: non-finite component");
  }
}

PrecComplex exp(const PrecComplex& z) {
  return PrecComplex::polar(boost::multiprecision::exp(z.re()), z.im());
}

PrecComplex sqr(const PrecComplex& z) { return z * z; }

// ---------------------------------------------------------------------------
// LogComplex

LogComplex LogComplex::zero() { return {neg_infinity(), Real(0)}; }

LogComplex LogComplex::one() { return {Real(0), Real(0)}; }

LogComplex log_from_value(const PrecComplex& w) {
  if (w.is_zero()) {
    return {round_to(neg_infinity(), w.digits()), round_to(Real(0), w.digits())};
  }
  WorkingPrecision guard(std::max(w.digits(), kMinDigits));
  return {boost::multiprecision::log(w.abs()), w.arg()};
}

PrecComplex to_value(const LogComplex& a) {
  if (a.is_zero()) return PrecComplex(round_to(Real(0), digits_of(a.arg)));
  if (a.logmag > kMaxLogMag) {
    throw OverflowError("to_value: modulus exp(" + to_string(a.logmag, 6) +
                        ") exceeds the exponent range");
  }
  WorkingPrecision guard(std::max(std::min(digits_of(a.logmag), digits_of(a.arg)), kMinDigits));
  return PrecComplex::polar(boost::multiprecision::exp(a.logmag), a.arg);
}

LogComplex log_mul(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero() || b.is_zero()) return LogComplex::zero();
  return {a.logmag + b.logmag, reduce_angle(a.arg + b.arg)};
}

LogComplex log_div(const LogComplex& a, const LogComplex& b) {
  if (b.is_zero()) throw Error("log_div: division by zero");
  if (a.is_zero()) return LogComplex::zero();
  return {a.logmag - b.logmag, reduce_angle(a.arg - b.arg)};
}

LogComplex log_neg(const LogComplex& a) {
  if (a.is_zero()) return a;
  WorkingPrecision guard(std::max(digits_of(a.arg), kMinDigits));
  return {a.logmag, reduce_angle(a.arg + pi_value())};
}

LogComplex log_pow(const LogComplex& a, const Real& n) {
  if (a.is_zero()) {
    if (n > 0) return LogComplex::zero();
    throw Error("log_pow: zero raised to a non-positive power");
  }
  return {a.logmag * n, scaled_angle(a.arg, n)};
}

LogSum log_add(const LogComplex& a, const LogComplex& b) {
  if (a.is_zero()) return {b};
  if (b.is_zero()) return {a};
  const bool a_big = a.logmag >= b.logmag;
  const LogComplex& big = a_big ? a : b;
  const LogComplex& small = a_big ? b : a;
  const unsigned d = std::max(std::min(digits_of(a.logmag), digits_of(b.logmag)), kMinDigits);
  WorkingPrecision guard(d);
  const Real log10e = ln10();
  const Real gap = small.logmag - big.logmag;  // <= 0
  if (gap < -Real(d) * log10e) {
    LogSum out{big};
    out.absorbed = true;
    return out;
  }
  const PrecComplex w = PrecComplex(Real(1)) +
                        PrecComplex::polar(boost::multiprecision::exp(gap), small.arg - big.arg);
  if (w.is_zero()) {
    LogSum out{LogComplex::zero()};
    out.cancelled = true;
    out.digits_lost = static_cast<double>(d);
    return out;
  }
  const Real lm = boost::multiprecision::log(w.abs());
  const double lost = -to_double(lm / log10e);
  if (lost > static_cast<double>(d) - 5.0) {
    LogSum out{LogComplex::zero()};
    out.cancelled = true;
    out.digits_lost = lost;
    return out;
  }
  LogSum out{{big.logmag + lm, reduce_angle(big.arg + w.arg())}};
  out.digits_lost = std::max(0.0, lost);
  return out;
}

LogComplex log_add_strict(const LogComplex& a, const LogComplex& b) {
  LogSum s = log_add(a, b);
  if (s.cancelled) {
    throw CancellationError("log_add: total cancellation, " + std::to_string(s.digits_lost) +
                                " digits lost",
                            s.digits_lost);
  }
  return std::move(s.value);
}

LogSum log_one_minus(const LogComplex& a) { return log_add(LogComplex::one(), log_neg(a)); }

}  // namespace lacunary
