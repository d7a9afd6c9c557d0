#pragma once

// Coefficients of w'' + A w' + B w = 0 solved by the lacunary product:
// A0 = f g, B0 = -(f'' + A0 f')/f, and the perturbation A = A0 + cHf,
// B = B0 - cHf' by a canonical product H of order rho_H.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "lacunary/interpolation.hpp"
#include "lacunary/product.hpp"

namespace lacunary {

/// H(z) = prod_{m<=M} (1 + z / m^{1/rho}), zeros on the negative axis.
class HProduct {
 public:
  HProduct(double rho, std::uint64_t truncation);

  double rho() const { return rho_; }
  std::uint64_t truncation() const { return zeros_.size(); }
  /// M^{1/rho} / 2.
  const Real& validity_radius() const { return validity_radius_; }
  /// Moduli m^{1/rho} of the zeros, increasing.
  const std::vector<Real>& zero_moduli() const { return zeros_; }

  /// Truncated product. TailError beyond the validity radius.
  PrecComplex value(const PrecComplex& z) const;
  LogComplex log_value(const PrecComplex& z) const;
  /// Bound on the omitted sum of |log(1 + z/a_m)|, m > M.
  Real log_tail_bound(const PrecComplex& z) const;

 private:
  double rho_;
  std::vector<Real> zeros_;
  Real validity_radius_;
};

/// ConfigError unless 0 < rho < 1/2.
HProduct build_H(double rho_H, std::uint64_t truncation);

struct CoefficientOptions {
  std::optional<double> rho_H;
  std::uint64_t H_truncation = 4096;
  double c_scale = 1.0;
  double near_zero_delta = 1e-8;
};

class CoefficientSystem {
 public:
  explicit CoefficientSystem(LacunaryConfig cfg, CoefficientOptions opts = {});
  CoefficientSystem(LacunaryConfig cfg, RationalInterpolant rat, CoefficientOptions opts = {});

  const LacunaryConfig& cfg() const { return cfg_; }
  const RationalInterpolant& rat() const { return rat_; }
  const std::optional<HProduct>& H() const { return h_; }
  const Real& c_scale() const { return c_scale_; }
  const Real& near_zero_delta() const { return delta_; }
  const CoefficientOptions& options() const { return opts_; }
  /// rho_H > rho_f, the growth premise for the perturbed equation.
  bool premise_holds() const;
  /// Largest |z| where every component is certified.
  Real certified_radius() const;

  /// Same system with u_index replaced by u + delta (poles and moments rebuilt).
  CoefficientSystem with_residue_offset(std::size_t index, const PrecComplex& delta) const;
  CoefficientSystem with_c_scale(double c) const;

  /// Pole index in rat() of a zero of f.
  std::size_t pole_index(const Zero& zero) const;

 private:
  LacunaryConfig cfg_;
  RationalInterpolant rat_;
  CoefficientOptions opts_;
  std::optional<HProduct> h_;
  Real c_scale_;
  Real delta_;
};

/// Power series in h = z - xi of f, A0 and B0 around a zero xi.
struct LocalSeries {
  Zero zero;
  std::vector<PrecComplex> f;
  std::vector<PrecComplex> a0;
  std::vector<PrecComplex> b0;
};
/// The order is chosen so the series is accurate to working precision for
/// |h| <= h_max; h_max = 0 gives the low-order series for use at xi itself.
LocalSeries local_series(const CoefficientSystem& sys, const Zero& zero, const Real& h_max);

PrecComplex eval_A0(const CoefficientSystem& sys, const PrecComplex& z);

enum class B0Branch { direct, removable };
struct B0Value {
  PrecComplex value;
  B0Branch branch = B0Branch::direct;
  double digits_lost = 0;
};
B0Value eval_B0_detail(const CoefficientSystem& sys, const PrecComplex& z);
PrecComplex eval_B0(const CoefficientSystem& sys, const PrecComplex& z);
/// Direct quotient form regardless of distance to zeros.
B0Value eval_B0_direct(const CoefficientSystem& sys, const PrecComplex& z);
/// Series at the nearest zero regardless of distance.
PrecComplex eval_B0_removable(const CoefficientSystem& sys, const PrecComplex& z);

/// (A, B). ConfigError when H is not configured.
std::pair<PrecComplex, PrecComplex> eval_AB(const CoefficientSystem& sys, const PrecComplex& z);

enum class Equation { base, perturbed };
/// |f'' + A f' + B f| / (|f''| + |A f'| + |B f|).
Real residual(const CoefficientSystem& sys, const PrecComplex& z, Equation which);
/// 10^(-P+40).
Real residual_tolerance(unsigned digits);

/// |A0(z_k) f'(z_k) + f''(z_k)| / |f''(z_k)|, with f', f'' from the Taylor
/// expansion at the zero (a path independent of the one that produced u).
/// Zero when f''(z_k) = 0 and the numerator vanishes.
Real interpolation_defect(const CoefficientSystem& sys, const Zero& zero);

struct CauchyResult {
  /// f''(xi)/f'(xi)^2 from the factor extraction.
  PrecComplex direct;
  /// -(1/2 pi i) int dz / (f'(z)(z - xi)^2) over |z - xi| = |xi|/n_k.
  PrecComplex contour;
  /// contour with the residues at enclosed zeros of f' removed; equals
  /// direct when the zeros are located correctly.
  PrecComplex contour_corrected;
  /// Zeros of f' enclosed by the contour (winding number of f').
  int enclosed = 0;
  std::vector<PrecComplex> fprime_zeros;
  /// Estimate from the half-node rule, relative to |direct|.
  Real quadrature_error;
  Real min_abs_fprime;
  /// (n_k/r_k) max 1/|f'| on the contour, bounds |contour|.
  Real contour_bound;
};
/// ZeroOnContourError if f' vanishes numerically at a node.
CauchyResult cauchy_ratio(const LacunaryConfig& cfg, const Zero& zero, std::size_t nodes = 256);

/// ln of 2e prod_{j<k} (r_j/r_k)^{n_j}.
Real log_cauchy_bound(const LacunaryConfig& cfg, std::size_t k);

/// f'(z) in value form, accurate also at and near zeros of f.
PrecComplex fprime(const LacunaryConfig& cfg, const PrecComplex& z);

}  // namespace lacunary
