#pragma once

// The rational series g(z) = sum_k u_k / (z - z_k) with u_k = -f''(z_k)/f'(z_k)^2,
// its summability certificate and the proximity function m(r, .).

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "lacunary/errors.hpp"
#include "lacunary/product.hpp"

namespace lacunary {

/// Raised when a pole list admits no summability certificate.
class DivergenceFlag : public Error {
 public:
  DivergenceFlag(const std::string& what, double exponent) : Error(what), exponent_(exponent) {}
  /// Estimated exponent of convergence of the pole moduli.
  double exponent() const noexcept { return exponent_; }

 private:
  double exponent_;
};

struct Pole {
  PrecComplex z;
  PrecComplex u;
  std::size_t block = 0;  ///< 1-based block of f, 0 for bare pole lists
  std::uint64_t index = 0;
};

class RationalInterpolant {
 public:
  /// Poles at the zeros of the truncated product, grouped by block.
  static RationalInterpolant from_config(const LacunaryConfig& cfg);
  /// A bare list of (z_k, u_k). Treated as the leading part of an infinite
  /// sequence when certifying summability.
  static RationalInterpolant from_poles(const std::vector<std::pair<PrecComplex, PrecComplex>>& poles);

  const std::vector<Pole>& poles() const { return poles_; }
  /// Copy with the residue of pole `index` replaced; bounds and expansions
  /// are recomputed, the tail model is kept.
  RationalInterpolant with_residue(std::size_t index, const PrecComplex& u) const;
  /// Poles of block k (1-based) occupy [block_offset(k-1), block_offset(k)).
  std::size_t block_offset(std::size_t k) const { return offsets_.at(k); }
  std::size_t block_count() const { return offsets_.size() - 1; }

  /// max_k |u_k| over the included poles.
  const Real& c_bound() const { return c_bound_; }
  /// sum |u_k / z_k| over included poles plus the tail bound.
  const Real& summability_certificate() const { return certificate_; }
  const Real& summability_partial() const { return partial_; }
  const Real& summability_tail() const { return sum_tail_; }

  /// Bound on |sum over omitted poles| valid for |z| <= certified_radius().
  const Real& eval_tail_bound() const { return eval_tail_; }
  /// +inf when nothing is omitted.
  const Real& certified_radius() const { return certified_radius_; }
  bool from_schedule() const { return schedule_; }
  /// Fitted exponent of convergence for bare pole lists.
  const std::optional<double>& exponent_estimate() const { return exponent_estimate_; }

  /// Circles of poles sharing one modulus, with far-field moment expansions.
  struct Group {
    std::size_t begin = 0;
    std::size_t end = 0;
    Real radius;
    Real abs_residue_sum;
    std::vector<PrecComplex> inner;  ///< sum u z_j^{-(m+1)}
    std::vector<PrecComplex> outer;  ///< sum u z_j^m
  };
  const std::vector<Group>& groups() const { return groups_; }

 private:
  RationalInterpolant() = default;
  void build_groups();

  std::vector<Pole> poles_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Group> groups_;
  Real c_bound_;
  Real partial_;
  Real sum_tail_;
  Real certificate_;
  Real eval_tail_;
  Real certified_radius_;
  bool schedule_ = false;
  std::optional<double> exponent_estimate_;
};

/// u at every zero up to block K.
RationalInterpolant residues_from_f(const LacunaryConfig& cfg);

struct GValue {
  PrecComplex value;
  Real tail_bound;
};

/// Partial sum over the included poles. NearPoleError within relative
/// distance 10^(-P/2) of a pole, TailError outside the certified radius.
GValue eval_g(const RationalInterpolant& rat, const PrecComplex& z);

/// Plain pole-by-pole sum, no expansions. Reference path for tests and audits.
PrecComplex eval_g_direct(const RationalInterpolant& rat, const PrecComplex& z);

/// Taylor coefficients at pole `skip` of g minus that pole's term:
/// c_m = (-1)^m sum_{j != skip} u_j / (z_skip - z_j)^{m+1}.
std::vector<PrecComplex> g_taylor_excluding(const RationalInterpolant& rat, std::size_t skip,
                                            std::size_t order);

struct SummabilityReport {
  std::vector<Real> block_sums;  ///< sum |u/z| over each block (or each pole for bare lists)
  Real partial;
  Real tail_bound;
  Real total;
  std::optional<double> exponent_estimate;
  bool pass = false;
};

/// Throws DivergenceFlag when the pole moduli grow too slowly for any
/// certificate (estimated exponent of convergence >= 1).
SummabilityReport check_summability(const RationalInterpolant& rat);

/// ln|F(z)|; -inf allowed.
using LogAbsFunction = std::function<Real(const PrecComplex&)>;

struct ProximityResult {
  double value = 0;
  std::size_t nodes = 0;
  double previous = 0;
};

/// (1/2pi) int log+|F(r e^{it})| dt by the trapezoid rule, doubling the node
/// count from `nodes` until successive estimates differ by < tol.
ProximityResult proximity_m(const LogAbsFunction& log_abs, const Real& r, std::size_t nodes = 64,
                            double tol = 1e-6, std::size_t node_cap = std::size_t{1} << 16);

/// m(r, g). Rejects radii within relative 1e-3 of a pole modulus.
ProximityResult proximity_m(const RationalInterpolant& rat, const Real& r, std::size_t nodes = 64,
                            double tol = 1e-6, std::size_t node_cap = std::size_t{1} << 16);

}  // namespace lacunary
