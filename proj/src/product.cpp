#include "lacunary/product.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>

namespace lacunary {

namespace mp = boost::multiprecision;

namespace {

constexpr std::uint64_t kMaxEnumerableZeros = std::uint64_t{1} << 24;

Real positive_infinity() { return -neg_infinity(); }

Real power_of_two(const Real& exponent) {
  Real r;
  mpfr_set_ui(r.backend().data(), 1, MPFR_RNDN);
  mpfr_mul_2si(r.backend().data(), r.backend().data(), exponent.convert_to<long>(), MPFR_RNDN);
  return r;
}

// log2 of r_k for the schedule rules; nullopt once the radius leaves the
// exponent range.
std::optional<Real> schedule_log2_radius(ScheduleRule rule, std::size_t k) {
  switch (rule) {
    case ScheduleRule::factorial: {
      if (k > 19) return std::nullopt;
      Real e = 1;
      for (std::size_t i = 2; i <= k; ++i) e *= static_cast<unsigned long>(i);
      return e;
    }
    case ScheduleRule::doubly_exp:
      if (k > 60) return std::nullopt;
      return Real(mp::pow(Real(2), static_cast<long>(k)));
    case ScheduleRule::explicit_list:
      break;
  }
  return std::nullopt;
}

Block make_block(const Real& radius, const Real& log_radius, const Real& count) {
  return Block{radius, log_radius, count};
}

Block schedule_block(ScheduleRule rule, const Real& rho, std::size_t k) {
  auto e = schedule_log2_radius(rule, k);
  if (!e) throw ConfigError("schedule block " + std::to_string(k) + " exceeds the exponent range");
  const Real log_r = *e * mp::log(Real(2));
  const Real log2_count = rho * *e;
  const Real count = log2_count == mp::round(log2_count) ? power_of_two(log2_count)
                                                         : mp::round(mp::exp(rho * log_r));
  return make_block(power_of_two(*e), log_r, (count < 1 ? Real(1) : count));
}

Real log_precision_floor() { return -Real(working_digits() + 10) * ln10(); }

// w = (z / r)^n in the log domain.
LogComplex power_term(const Block& b, const LogComplex& logz) {
  if (logz.is_zero()) return LogComplex::zero();
  return log_pow(LogComplex{logz.logmag - b.log_radius, logz.arg}, b.count);
}

struct Terms {
  PrecComplex first;   // n w / (z (w - 1)), the block's share of f'/f
  PrecComplex second;  // its derivative
};

Terms block_terms(const Block& b, const PrecComplex& z, const LogComplex& logz) {
  const LogComplex w = power_term(b, logz);
  const Real limit = -log_precision_floor();
  const PrecComplex n_over_z = PrecComplex(b.count) / z;
  if (w.logmag > limit) {
    // w / (w - 1) = 1 to working precision.
    return {n_over_z, -n_over_z / z};
  }
  if (w.is_zero() || w.logmag < -limit) return {PrecComplex(), PrecComplex()};
  const PrecComplex wv = to_value(w);
  const PrecComplex wm1 = wv - PrecComplex(1.0);
  const PrecComplex a = wv / wm1;
  const PrecComplex t1 = n_over_z * a;
  const PrecComplex t2 = -(t1 / z) - n_over_z * n_over_z * a / wm1;
  return {t1, t2};
}

// |z - xi| for the zero of block b nearest to z.
Real distance_to_block(const Block& b, const Real& modulus, const Real& arg) {
  const Real offset = scaled_angle(arg, b.count) / b.count;
  const Real s = mp::sin(offset / 2);
  const Real radial = modulus - b.radius;
  return mp::sqrt(radial * radial + 4 * modulus * b.radius * s * s);
}

std::uint64_t nearest_index(const Block& b, std::uint64_t n, const Real& arg) {
  const unsigned hi = working_digits() + 25;
  WorkingPrecision guard(hi);
  Real t = Real(arg, hi) * Real(b.count, hi) / two_pi();
  t = mp::round(t);
  long long j = t.convert_to<long long>() % static_cast<long long>(n);
  if (j < 0) j += static_cast<long long>(n);
  return static_cast<std::uint64_t>(j);
}

}  // namespace

std::string to_string(ScheduleRule rule) {
  switch (rule) {
    case ScheduleRule::factorial:
      return "factorial";
    case ScheduleRule::doubly_exp:
      return "doubly_exp";
    case ScheduleRule::explicit_list:
      return "explicit";
  }
  return "explicit";
}

ScheduleRule parse_schedule_rule(const std::string& name) {
  if (name == "factorial") return ScheduleRule::factorial;
  if (name == "doubly_exp") return ScheduleRule::doubly_exp;
  if (name == "explicit") return ScheduleRule::explicit_list;
  throw ConfigError("unknown schedule rule '" + name + "'");
}

std::optional<std::uint64_t> Block::exact_count() const {
  if (count > Real(std::uint64_t{1} << 62)) return std::nullopt;
  return count.convert_to<std::uint64_t>();
}

// ---------------------------------------------------------------------------
// LacunaryConfig

LacunaryConfig LacunaryConfig::schedule(double rho_f, std::size_t K, ScheduleRule rule,
                                        unsigned digits) {
  if (!(rho_f > 0.0 && rho_f < 1.0)) {
    throw ConfigError("rho_f must lie in (0,1), got " + std::to_string(rho_f));
  }
  if (K < 1) throw ConfigError("truncation level K must be at least 1");
  if (rule == ScheduleRule::explicit_list) {
    throw ConfigError("explicit schedules need a block list");
  }
  WorkingPrecision guard(digits);
  LacunaryConfig cfg;
  cfg.rho_ = Real(rho_f);
  cfg.rho_double_ = rho_f;
  cfg.rule_ = rule;
  cfg.digits_ = digits;
  for (std::size_t k = 1; k <= K; ++k) cfg.blocks_.push_back(schedule_block(rule, cfg.rho_, k));
  cfg.validate_and_certify();
  return cfg;
}

LacunaryConfig LacunaryConfig::explicit_blocks(
    const std::vector<std::pair<Real, std::uint64_t>>& blocks, double rho_f, unsigned digits) {
  if (!(rho_f > 0.0 && rho_f < 1.0)) {
    throw ConfigError("rho_f must lie in (0,1), got " + std::to_string(rho_f));
  }
  if (blocks.empty()) throw ConfigError("explicit block list is empty");
  WorkingPrecision guard(digits);
  LacunaryConfig cfg;
  cfg.rho_ = Real(rho_f);
  cfg.rho_double_ = rho_f;
  cfg.rule_ = ScheduleRule::explicit_list;
  cfg.digits_ = digits;
  for (const auto& [r, n] : blocks) {
    const Real radius(r, digits);
    if (!(radius > 0)) throw ConfigError("block radii must be positive");
    if (n < 1) throw ConfigError("block counts must be at least 1");
    cfg.blocks_.push_back(make_block(radius, mp::log(radius), Real(n)));
  }
  cfg.validate_and_certify();
  return cfg;
}

void LacunaryConfig::validate_and_certify() {
  WorkingPrecision guard(digits_);
  Real partial = 0;
  Real running = 0;
  const Real s = certificate_exponent();
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const Block& b = blocks_[k];
    if (k > 0 && !(b.radius > blocks_[k - 1].radius)) {
      throw ConfigError("block radii must be strictly increasing (block " + std::to_string(k + 1) +
                        ")");
    }
    const Real target = mp::round(mp::exp(rho_ * b.log_radius));
    // counts past the mantissa are exact powers of two; r_k^rho is only known to P digits
    const Real slack = std::max(Real(1), target * mp::pow(Real(10), -Real(digits_) + 5));
    if (mp::abs(b.count - target) > slack) {
      throw ConfigError("block " + std::to_string(k + 1) + ": n_k = " + to_string(b.count, 6) +
                        " is not within 1 of round(r_k^rho) = " + to_string(target, 6));
    }
    if (k > 0 && 2 * running > b.count) {
      throw ConfigError("block " + std::to_string(k + 1) +
                        ": sum of earlier counts exceeds n_k/2 (list too dense)");
    }
    running += b.count;
    partial += mp::exp(mp::log(b.count) - s * b.log_radius);
  }

  sigma_tail_ = 0;
  next_block_.reset();
  if (!is_finite_product()) {
    next_block_ = extended_block(blocks_.size() + 1);
    const std::size_t K = blocks_.size();
    std::vector<Real> terms;
    for (std::size_t k = K + 1; k <= K + 3; ++k) {
      auto b = extended_block(k);
      if (!b) break;
      terms.push_back(mp::exp(mp::log(b->count) - s * b->log_radius));
    }
    if (terms.size() < 3 || terms[2] > terms[1] / 2) {
      throw ConfigError("cannot certify the convergence-exponent tail for this schedule");
    }
    // Terms beyond K+3 decay faster than the ratio terms[2]/terms[1] <= 1/2.
    sigma_tail_ = terms[0] + terms[1] + 2 * terms[2];
  }
  sigma_certificate_ = partial + sigma_tail_;
  if (mpfr_number_p(sigma_certificate_.backend().data()) == 0) {
    throw ConfigError("convergence-exponent certificate is not finite");
  }
}

const Block& LacunaryConfig::block(std::size_t k) const {
  if (k < 1 || k > blocks_.size()) {
    throw ConfigError("block index " + std::to_string(k) + " outside 1.." +
                      std::to_string(blocks_.size()));
  }
  return blocks_[k - 1];
}

std::optional<Block> LacunaryConfig::extended_block(std::size_t k) const {
  if (k >= 1 && k <= blocks_.size()) return blocks_[k - 1];
  if (is_finite_product() || k < 1) return std::nullopt;
  if (!schedule_log2_radius(rule_, k)) return std::nullopt;
  WorkingPrecision guard(digits_);
  return schedule_block(rule_, rho_, k);
}

Real LacunaryConfig::certified_radius() const {
  WorkingPrecision guard(digits_);
  if (!next_block_) return positive_infinity();
  return next_block_->radius / 2;
}

Real LacunaryConfig::certificate_exponent() const {
  WorkingPrecision guard(digits_);
  return (1 + rho_) / 2;
}

std::uint64_t LacunaryConfig::zero_count(std::size_t k) const {
  const auto n = block(k).exact_count();
  if (!n || *n > kMaxEnumerableZeros) {
    throw ConfigError("block " + std::to_string(k) + " has too many zeros to enumerate");
  }
  return *n;
}

std::uint64_t LacunaryConfig::total_zero_count() const {
  std::uint64_t total = 0;
  for (std::size_t k = 1; k <= blocks_.size(); ++k) total += zero_count(k);
  return total;
}

LacunaryConfig LacunaryConfig::prefix(std::size_t k) const {
  if (k < 1 || k > blocks_.size()) throw ConfigError("prefix length out of range");
  LacunaryConfig out = *this;
  out.blocks_.resize(k);
  out.rule_ = ScheduleRule::explicit_list;
  out.validate_and_certify();
  return out;
}

LacunaryConfig make_schedule(double rho_f, std::size_t K, ScheduleRule rule, unsigned digits) {
  return LacunaryConfig::schedule(rho_f, K, rule, digits);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void multiply_factor(LogComplex& acc, const Block& b, const LogComplex& logz) {
  if (acc.is_zero()) return;
  const LogComplex w = power_term(b, logz);
  if (w.is_zero() || w.logmag < log_precision_floor()) return;
  const LogSum factor = log_one_minus(w);
  acc = factor.cancelled ? LogComplex::zero() : log_mul(acc, factor.value);
}

}  // namespace

ProductValue eval_f(const LacunaryConfig& cfg, const PrecComplex& z) {
  WorkingPrecision guard(cfg.digits());
  const Real modulus = z.abs();
  if (!(modulus < cfg.certified_radius())) {
    throw TailError("|z| = " + to_string(modulus, 6) + " outside the certified radius " +
                    to_string(cfg.certified_radius(), 6));
  }
  ProductValue out{LogComplex::one(), neg_infinity()};
  if (z.is_zero()) return out;
  const LogComplex logz = log_from_value(z);
  for (const Block& b : cfg.blocks()) multiply_factor(out.value, b, logz);
  if (const auto& next = cfg.next_block()) {
    out.log_tail_bound = mp::log(Real(2)) + next->count * (logz.logmag - next->log_radius);
  }
  return out;
}

LogComplex eval_f_formula(const LacunaryConfig& cfg, const PrecComplex& z) {
  WorkingPrecision guard(cfg.digits());
  if (z.is_zero()) return LogComplex::one();
  const LogComplex logz = log_from_value(z);
  const Real floor = log_precision_floor();
  LogComplex acc = LogComplex::one();
  for (std::size_t k = 1;; ++k) {
    auto b = cfg.extended_block(k);
    if (!b) break;
    if (b->log_radius > logz.logmag && b->count * (logz.logmag - b->log_radius) < floor) break;
    multiply_factor(acc, *b, logz);
  }
  return acc;
}

LogComplex eval_partial_product(const LacunaryConfig& cfg, std::size_t k, const PrecComplex& z) {
  WorkingPrecision guard(cfg.digits());
  if (z.is_zero()) return LogComplex::one();
  const LogComplex logz = log_from_value(z);
  LogComplex acc = LogComplex::one();
  for (std::size_t j = 1; j <= k; ++j) {
    auto b = cfg.extended_block(j);
    if (!b) break;
    multiply_factor(acc, *b, logz);
  }
  return acc;
}

PrecComplex log_derivative(const LacunaryConfig& cfg, const PrecComplex& z, int order) {
  if (order != 1 && order != 2) throw Error("log_derivative: order must be 1 or 2");
  WorkingPrecision guard(cfg.digits());
  PrecComplex sum;
  if (z.is_zero()) {
    // Only blocks with n_k <= 2 contribute at the origin.
    for (const Block& b : cfg.blocks()) {
      if (b.count == 1) {
        sum += order == 1 ? PrecComplex(-1 / b.radius) : PrecComplex(-1 / (b.radius * b.radius));
      } else if (b.count == 2 && order == 2) {
        sum += PrecComplex(-2 / (b.radius * b.radius));
      }
    }
    return sum;
  }
  const NearestZero near = nearest_zero(cfg, z);
  const Real threshold = mp::pow(Real(10), -Real(cfg.digits()) / 2);
  if (near.relative_distance < threshold) {
    throw NearZeroError("log_derivative: z within relative distance " +
                        to_string(near.relative_distance, 3) + " of a zero of block " +
                        std::to_string(near.block));
  }
  const LogComplex logz = log_from_value(z);
  for (const Block& b : cfg.blocks()) {
    Terms t = block_terms(b, z, logz);
    sum += order == 1 ? t.first : t.second;
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Zeros

Zero zero_at(const LacunaryConfig& cfg, std::size_t k, std::uint64_t index) {
  WorkingPrecision guard(cfg.digits());
  const std::uint64_t n = cfg.zero_count(k);
  if (index >= n) throw ConfigError("zero index out of range");
  const Real& r = cfg.block(k).radius;
  const Real zero_r = 0;
  Zero out{k, index, PrecComplex()};
  if (index == 0) {
    out.value = PrecComplex(r, zero_r);
  } else if (2 * index == n) {
    out.value = PrecComplex(-r, zero_r);
  } else if (4 * index == n) {
    out.value = PrecComplex(zero_r, r);
  } else if (4 * index == 3 * n) {
    out.value = PrecComplex(zero_r, -r);
  } else if (2 * index > n) {
    out.value = zero_at(cfg, k, n - index).value.conj();
  } else {
    const Real angle = two_pi() * Real(index) / Real(n);
    out.value = PrecComplex(r * mp::cos(angle), r * mp::sin(angle));
  }
  return out;
}

std::vector<Zero> zeros(const LacunaryConfig& cfg, std::size_t k) {
  const std::uint64_t n = cfg.zero_count(k);
  std::vector<Zero> out;
  out.reserve(n);
  for (std::uint64_t j = 0; j < n; ++j) out.push_back(zero_at(cfg, k, j));
  return out;
}

NearestZero nearest_zero(const LacunaryConfig& cfg, const PrecComplex& z, bool extended) {
  WorkingPrecision guard(cfg.digits());
  const Real modulus = z.abs();
  const Real arg = z.arg();
  NearestZero best{0, std::nullopt, positive_infinity(), positive_infinity()};
  for (std::size_t k = 1;; ++k) {
    std::optional<Block> b = extended ? cfg.extended_block(k)
                                      : (k <= cfg.truncation() ? std::optional<Block>(cfg.block(k))
                                                               : std::nullopt);
    if (!b) break;
    if (b->radius > 4 * modulus && best.block != 0) break;
    const Real d = distance_to_block(*b, modulus, arg);
    const Real rel = d / b->radius;
    if (rel < best.relative_distance) {
      best.block = k;
      best.distance = d;
      best.relative_distance = rel;
      best.index.reset();
      if (auto n = b->exact_count(); n && *n <= kMaxEnumerableZeros) {
        best.index = nearest_index(*b, *n, arg);
      }
    }
  }
  return best;
}

namespace {

struct Cofactor {
  LogComplex value;  // P(xi), product over the other blocks
  PrecComplex log_derivative;
  PrecComplex log_derivative_prime;
};

Cofactor cofactor_at(const LacunaryConfig& cfg, const Zero& zero) {
  const LogComplex logxi = log_from_value(zero.value);
  Cofactor c{LogComplex::one(), PrecComplex(), PrecComplex()};
  for (std::size_t j = 1; j <= cfg.truncation(); ++j) {
    if (j == zero.block) continue;
    const Block& b = cfg.block(j);
    multiply_factor(c.value, b, logxi);
    Terms t = block_terms(b, zero.value, logxi);
    c.log_derivative += t.first;
    c.log_derivative_prime += t.second;
  }
  if (c.value.is_zero()) throw Error("cofactor vanishes at a zero: blocks share a modulus");
  return c;
}

}  // namespace

std::array<LogComplex, 3> derivs_at_zero(const LacunaryConfig& cfg, const Zero& zero) {
  WorkingPrecision guard(cfg.digits());
  const Cofactor c = cofactor_at(cfg, zero);
  const Real n = cfg.block(zero.block).count;
  const PrecComplex& xi = zero.value;
  // Derivatives of q(z) = 1 - (z/r)^n at a point where (xi/r)^n = 1.
  const PrecComplex q1 = -PrecComplex(n) / xi;
  const PrecComplex q2 = q1 * PrecComplex(n - 1) / xi;
  const PrecComplex q3 = q2 * PrecComplex(n - 2) / xi;
  const PrecComplex& L = c.log_derivative;
  const PrecComplex p2 = L * L + c.log_derivative_prime;  // P''/P
  const PrecComplex b1 = q1;
  const PrecComplex b2 = q2 + PrecComplex(2.0) * q1 * L;
  const PrecComplex b3 = q3 + PrecComplex(3.0) * q2 * L + PrecComplex(3.0) * q1 * p2;
  return {log_mul(log_from_value(b1), c.value), log_mul(log_from_value(b2), c.value),
          log_mul(log_from_value(b3), c.value)};
}

std::vector<PrecComplex> taylor_at_zero(const LacunaryConfig& cfg, const Zero& zero,
                                        std::size_t order) {
  WorkingPrecision guard(cfg.digits());
  const PrecComplex& xi = zero.value;
  const LogComplex logxi = log_from_value(xi);
  std::vector<PrecComplex> acc(order + 1);
  acc[0] = PrecComplex(1.0);
  for (std::size_t j = 1; j <= cfg.truncation(); ++j) {
    const Block& b = cfg.block(j);
    // factor(xi + h) = 1 - w (1 + h/xi)^n, with w = 1 exactly for the own block.
    const PrecComplex w = j == zero.block ? PrecComplex(1.0) : to_value(power_term(b, logxi));
    std::vector<PrecComplex> factor(order + 1);
    factor[0] = j == zero.block ? PrecComplex() : PrecComplex(1.0) - w;
    PrecComplex binom = w;  // w * C(n, i) / xi^i
    for (std::size_t i = 1; i <= order; ++i) {
      binom = binom * PrecComplex(b.count - Real(i - 1)) / (PrecComplex(Real(i)) * xi);
      factor[i] = -binom;
    }
    std::vector<PrecComplex> next(order + 1);
    for (std::size_t a = 0; a <= order; ++a) {
      if (acc[a].is_zero()) continue;
      for (std::size_t c = 0; a + c <= order; ++c) next[a + c] += acc[a] * factor[c];
    }
    acc = std::move(next);
  }
  acc[0] = PrecComplex();
  return acc;
}

}  // namespace lacunary
