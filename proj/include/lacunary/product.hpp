#pragma once

// The lacunary canonical product
//
//     f(z) = prod_k (1 - (z / r_k)^{n_k})
//
// with zeros on sparse circles |z| = r_k, its logarithmic derivatives, its
// zero set and derivatives at zeros obtained by isolating the vanishing factor.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lacunary/precision.hpp"

namespace lacunary {

enum class ScheduleRule { factorial, doubly_exp, explicit_list };

std::string to_string(ScheduleRule rule);
ScheduleRule parse_schedule_rule(const std::string& name);

/// One circle of zeros: n_k equally spaced zeros of modulus r_k.
struct Block {
  Real radius;      ///< r_k
  Real log_radius;  ///< ln r_k
  Real count;       ///< n_k, integer valued (exact while below 2^(bits of precision))

  /// n_k as a machine integer, if it fits in 62 bits.
  std::optional<std::uint64_t> exact_count() const;
};

class LacunaryConfig {
 public:
  /// r_k = 2^(k!) (factorial) or 2^(2^k) (doubly_exp), n_k = round(r_k^rho).
  static LacunaryConfig schedule(double rho_f, std::size_t K, ScheduleRule rule,
                                 unsigned digits = kDefaultDigits);

  /// Finite product from an explicit (r_k, n_k) list. rho_f is the order the
  /// counts are checked against.
  static LacunaryConfig explicit_blocks(const std::vector<std::pair<Real, std::uint64_t>>& blocks,
                                        double rho_f, unsigned digits = kDefaultDigits);

  const Real& rho() const { return rho_; }
  double rho_double() const { return rho_double_; }
  ScheduleRule rule() const { return rule_; }
  std::size_t truncation() const { return blocks_.size(); }
  unsigned digits() const { return digits_; }

  std::span<const Block> blocks() const { return blocks_; }
  /// 1-based block of the truncated product, 1 <= k <= K.
  const Block& block(std::size_t k) const;
  /// 1-based block of the infinite product; generated on demand for schedule
  /// rules, nullopt past the end of an explicit list.
  std::optional<Block> extended_block(std::size_t k) const;

  /// True for explicit lists: the configuration is the whole (finite) product.
  bool is_finite_product() const { return rule_ == ScheduleRule::explicit_list; }

  /// r_{K+1}/2, the radius inside which truncation is certified (+inf for
  /// finite products).
  Real certified_radius() const;
  /// Block K+1 of a schedule (nullopt for finite products).
  const std::optional<Block>& next_block() const { return next_block_; }

  /// Exponent s = (1 + rho)/2 of the convergence certificate.
  Real certificate_exponent() const;
  /// sum_k n_k / r_k^s over all k (partial sum plus tail bound).
  const Real& sigma_certificate() const { return sigma_certificate_; }
  /// Bound on sum_{k>K} n_k / r_k^s.
  const Real& sigma_tail() const { return sigma_tail_; }

  /// n_k as an integer; throws ConfigError when the block is too large to enumerate.
  std::uint64_t zero_count(std::size_t k) const;
  std::uint64_t total_zero_count() const;

  /// The finite product of the first k blocks.
  LacunaryConfig prefix(std::size_t k) const;

 private:
  LacunaryConfig() = default;
  void validate_and_certify();

  Real rho_;
  double rho_double_ = 0.5;
  ScheduleRule rule_ = ScheduleRule::explicit_list;
  unsigned digits_ = kDefaultDigits;
  std::vector<Block> blocks_;
  Real sigma_certificate_;
  Real sigma_tail_;
  std::optional<Block> next_block_;
};

/// Convenience wrapper matching the schedule constructor.
LacunaryConfig make_schedule(double rho_f, std::size_t K, ScheduleRule rule,
                             unsigned digits = kDefaultDigits);

/// A zero xi = r_k exp(2 pi i j / n_k).
struct Zero {
  std::size_t block = 0;  ///< 1-based k
  std::uint64_t index = 0;
  PrecComplex value;
};

struct ProductValue {
  LogComplex value;
  /// ln of the bound on sum_{k>K} |z/r_k|^{n_k}; -inf for finite products.
  Real log_tail_bound;
};

/// Truncated product at z, in the log domain. Throws TailError when
/// |z| >= r_{K+1}/2.
ProductValue eval_f(const LacunaryConfig& cfg, const PrecComplex& z);

/// The infinite product at z, including as many schedule blocks beyond K as
/// contribute at the working precision. No domain restriction.
LogComplex eval_f_formula(const LacunaryConfig& cfg, const PrecComplex& z);

/// The product of the first k blocks only.
LogComplex eval_partial_product(const LacunaryConfig& cfg, std::size_t k, const PrecComplex& z);

/// order 1: f'/f; order 2: (f'/f)'. Termwise over the truncated product.
/// Throws NearZeroError within relative distance 10^(-P/2) of a zero.
PrecComplex log_derivative(const LacunaryConfig& cfg, const PrecComplex& z, int order);

/// The n_k zeros of block k in index order.
std::vector<Zero> zeros(const LacunaryConfig& cfg, std::size_t k);
Zero zero_at(const LacunaryConfig& cfg, std::size_t k, std::uint64_t index);

struct NearestZero {
  std::size_t block = 0;
  /// Index of the nearest zero when the block is enumerable.
  std::optional<std::uint64_t> index;
  Real distance;           ///< |z - xi|
  Real relative_distance;  ///< |z - xi| / r_k
};

/// Nearest zero over the blocks of the truncated product (or of the
/// infinite product when `extended` is set).
NearestZero nearest_zero(const LacunaryConfig& cfg, const PrecComplex& z, bool extended = false);

/// (f'(xi), f''(xi), f'''(xi)) by factor extraction f = q P, q = 1 - (z/r_k)^{n_k}.
std::array<LogComplex, 3> derivs_at_zero(const LacunaryConfig& cfg, const Zero& zero);

/// Taylor coefficients c_0..c_order of f(xi + h), c_0 = 0 exactly.
std::vector<PrecComplex> taylor_at_zero(const LacunaryConfig& cfg, const Zero& zero,
                                        std::size_t order);

}  // namespace lacunary
