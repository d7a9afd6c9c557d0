#pragma once

// Growth of the lacunary product: maximum modulus, Nevanlinna characteristics,
// order and lower order along the schedule, the indicator with exceptional
// disks, and the asymptotic checks near a circle of zeros.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lacunary/coefficients.hpp"
#include "lacunary/interpolation.hpp"
#include "lacunary/product.hpp"

namespace lacunary {

struct MaxModulus {
  Real log_value;
  Real theta;
};

/// max over n_theta uniform angles of ln|F(r e^{it})|, then golden-section
/// refinement around the best angle to angular resolution 1e-6 (relative to 2pi).
MaxModulus log_max_modulus(const LogAbsFunction& log_abs, const Real& r, std::size_t n_theta = 360);

/// ln M(r) of the infinite product from the block terms t_j = n_j ln(r/r_j):
/// lower = ln(1 + e^{t_*}) + sum_{j != *} ln|e^{t_j} - 1| with * the block whose
/// t is closest to 0, upper = sum_j ln(1 + e^{t_j}). Radius given as ln r.
struct LogMaxBounds {
  Real lower;
  Real upper;
};
LogMaxBounds log_max_modulus_formula(const LacunaryConfig& cfg, const Real& log_r);

struct Nevanlinna {
  double m = 0;
  Real N;
  double T = 0;
};
/// N(r) = sum_{|a| <= r} ln(r/|a|) over `divisor` (moduli, each counted once).
Real counting_N(const std::vector<Real>& divisor, const Real& r);
Nevanlinna nevanlinna(const LogAbsFunction& log_abs, const std::vector<Real>& divisor, const Real& r);
Nevanlinna nevanlinna(const RationalInterpolant& rat, const Real& r);

enum class RadiusKind { dip, peak };
struct OrderSample {
  std::size_t k = 0;
  RadiusKind kind = RadiusKind::dip;
  Real log_r;
  LogMaxBounds log_M;
  /// ln ln M / ln r from the upper bound.
  Real ratio;
};
struct OrderScan {
  std::vector<OrderSample> samples;
  Real max_peak;
  Real min_dip;
  bool dips_decreasing = false;
  /// |peak ratio - rho| nonincreasing in k.
  bool peaks_approach_rho = false;
};
/// Dip radii r_k and peak radii e r_k for k in [k_lo, k_hi].
OrderScan order_scan(const LacunaryConfig& cfg, std::size_t k_lo, std::size_t k_hi);

/// Zeros a e^{i(phase + 2 pi j / count)}, j < count.
struct ZeroFamily {
  Real modulus;
  Real count;
  Real phase;
};
std::vector<ZeroFamily> zero_families(const LacunaryConfig& cfg, std::size_t blocks);
std::vector<ZeroFamily> zero_families(const HProduct& h);

/// Exceptional disks of radius scale |a| / N(|a|) around every zero, N the
/// number of zeros of modulus <= |a|.
class ExclusionModel {
 public:
  explicit ExclusionModel(std::vector<ZeroFamily> families, double scale = 1.0 / 25);
  bool excluded(const PrecComplex& z) const;
  /// Sum of disk radii over zeros of modulus <= r.
  Real radius_sum(const Real& r) const;
  Real disk_radius(std::size_t family) const { return radii_.at(family); }

 private:
  std::vector<ZeroFamily> families_;
  std::vector<Real> radii_;
};

struct IndicatorSample {
  Real theta;
  Real r;
  Real log_abs;
  Real ratio;  ///< ln|F| / r^rho
  bool excluded = false;
};
struct IndicatorScan {
  std::vector<IndicatorSample> samples;
  /// (r, excluded radius sum / r) for every scanned radius.
  std::vector<std::pair<Real, Real>> budget;
  bool budget_ok = false;
  std::optional<Real> min_ratio;  ///< over non-excluded samples
};
IndicatorScan indicator_scan(const LogAbsFunction& log_abs, double rho, const std::vector<Real>& thetas,
                             const std::vector<Real>& radii, const ExclusionModel& exclusions);

struct CrgWitness {
  std::vector<std::size_t> ks;
  std::vector<Real> a;  ///< ln M(r_k) / r_k^rho (upper bound)
  std::vector<Real> b;  ///< ln M(e r_k) / (e r_k)^rho (lower bound)
  bool violation = false;
  std::string reason;
};
CrgWitness crg_witness(const LacunaryConfig& cfg, double rho, std::size_t k_lo, std::size_t k_hi);

struct SubCheck {
  std::string name;
  Real value;  ///< worst measured deviation
  Real bound;  ///< worst admissible deviation from the exact error terms
  Real scale;  ///< nominal decay scale of the error
  bool pass = false;
};
struct AsymptoticsReport {
  std::size_t k = 0;
  std::vector<SubCheck> checks;
  /// (block, winding number of f' on the disk boundary, min |f'| there)
  std::vector<std::tuple<std::size_t, int, Real>> disks;
  bool pass = false;
};
/// Near the circle |z| = r_k: f against its k-block partial product,
/// zf'/f against the dominant-term model, |f'| on the boundary of D_xi against
/// the product form, and D_xi free of zeros of f' for one zero per block
/// from k to K. Requires 2 <= k <= K.
AsymptoticsReport verify_asymptotics(const LacunaryConfig& cfg, std::size_t k, std::uint64_t seed = 1,
                                     std::size_t points = 32);

struct GrowthSample {
  Real r;
  Real log_M;
  double m = 0;
  Real N;
  double T = 0;
};
struct GrowthReport {
  std::vector<GrowthSample> samples;
  OrderScan order;
  CrgWitness witness;
  std::vector<IndicatorSample> indicator;
  std::vector<std::pair<std::string, bool>> pass_flags;
};

}  // namespace lacunary
