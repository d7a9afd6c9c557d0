#include "lacunary/coefficients.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace lacunary {

namespace mp = boost::multiprecision;

namespace {

Real tenth_power(double e) { return mp::pow(Real(10), Real(e)); }

PrecComplex horner(const std::vector<PrecComplex>& c, const PrecComplex& h) {
  PrecComplex acc;
  for (std::size_t m = c.size(); m-- > 0;) acc = acc * h + c[m];
  return acc;
}

// (f, f', f'') at z. Near a zero of f the Taylor expansion there is used.
std::array<PrecComplex, 3> derivatives(const LacunaryConfig& cfg, const PrecComplex& z) {
  const auto near = nearest_zero(cfg, z);
  const Real close = tenth_power(-double(working_digits()) / 3);
  if (near.index && near.relative_distance < close) {
    const Zero zero = zero_at(cfg, near.block, *near.index);
    const PrecComplex h = z - zero.value;
    const auto c = taylor_at_zero(cfg, zero, 8);
    std::vector<PrecComplex> d1, d2;
    for (std::size_t m = 1; m < c.size(); ++m) d1.push_back(c[m] * Real(static_cast<unsigned long>(m)));
    for (std::size_t m = 2; m < c.size(); ++m) {
      d2.push_back(c[m] * Real(static_cast<unsigned long>(m * (m - 1))));
    }
    return {horner(c, h), horner(d1, h), horner(d2, h)};
  }
  const PrecComplex f = to_value(eval_f(cfg, z).value);
  const PrecComplex l1 = log_derivative(cfg, z, 1);
  const PrecComplex l2 = log_derivative(cfg, z, 2);
  return {f, f * l1, f * (l1 * l1 + l2)};
}

// A0 and B0 only need the product's domain; A and B also need H's.
void require_domain(const CoefficientSystem& sys, const PrecComplex& z, bool with_h = false) {
  const Real r = with_h ? sys.certified_radius() : sys.cfg().certified_radius();
  if (z.abs() > r) throw TailError("coefficients evaluated outside |z| <= " + to_string(r, 6));
}

// Distance from xi to the nearest other zero, or the local scale r_k/n_k
// when that is smaller.
Real local_scale(const LacunaryConfig& cfg, const Zero& zero) {
  const Block& b = cfg.block(zero.block);
  Real d = b.radius / b.count;
  for (std::size_t j = 1; j <= cfg.truncation(); ++j) {
    if (j == zero.block) continue;
    const Real gap = mp::abs(cfg.block(j).radius - b.radius);
    if (gap < d) d = gap;
  }
  return d;
}

}  // namespace

HProduct::HProduct(double rho, std::uint64_t truncation) : rho_(rho) {
  if (!(rho > 0 && rho < 0.5)) throw ConfigError("rho_H must lie in (0, 1/2)");
  if (truncation == 0) throw ConfigError("H_truncation must be positive");
  const double inv = 1.0 / rho;
  const bool integral = std::abs(inv - std::round(inv)) < 1e-12;
  zeros_.reserve(truncation);
  for (std::uint64_t m = 1; m <= truncation; ++m) {
    const Real mm(static_cast<unsigned long long>(m));
    zeros_.push_back(integral ? Real(mp::pow(mm, static_cast<long>(std::lround(inv))))
                              : Real(exp(log(mm) / Real(rho))));
  }
  validity_radius_ = zeros_.back() / 2;
}

PrecComplex HProduct::value(const PrecComplex& z) const {
  if (z.abs() > validity_radius_) {
    throw TailError("H evaluated outside |z| <= " + to_string(validity_radius_, 6));
  }
  PrecComplex acc(1.0);
  const Real re = z.re();
  const Real im = z.im();
  for (const Real& a : zeros_) {
    acc = acc * PrecComplex(1 + re / a, im / a);
  }
  return acc;
}

LogComplex HProduct::log_value(const PrecComplex& z) const { return log_from_value(value(z)); }

Real HProduct::log_tail_bound(const PrecComplex& z) const {
  const Real inv = Real(1) / Real(rho_);
  const Real M(static_cast<unsigned long long>(zeros_.size()));
  return z.abs() * exp((1 - inv) * log(M)) / (inv - 1);
}

HProduct build_H(double rho_H, std::uint64_t truncation) { return HProduct(rho_H, truncation); }

CoefficientSystem::CoefficientSystem(LacunaryConfig cfg, CoefficientOptions opts)
    : CoefficientSystem(cfg, residues_from_f(cfg), opts) {}

CoefficientSystem::CoefficientSystem(LacunaryConfig cfg, RationalInterpolant rat,
                                     CoefficientOptions opts)
    : cfg_(std::move(cfg)), rat_(std::move(rat)), opts_(opts) {
  WorkingPrecision prec(cfg_.digits());
  const double lo = std::pow(10.0, -double(cfg_.digits()) / 2);
  if (!(opts.near_zero_delta >= lo * (1 - 1e-12) && opts.near_zero_delta <= 1e-4)) {
    throw ConfigError("near_zero_delta must lie in [10^(-P/2), 1e-4]");
  }
  delta_ = Real(opts.near_zero_delta);
  c_scale_ = Real(opts.c_scale);
  if (opts.rho_H) h_.emplace(*opts.rho_H, opts.H_truncation);
}

bool CoefficientSystem::premise_holds() const { return h_ && h_->rho() > cfg_.rho_double(); }

Real CoefficientSystem::certified_radius() const {
  Real r = cfg_.certified_radius();
  if (h_ && h_->validity_radius() < r) r = h_->validity_radius();
  return r;
}

CoefficientSystem CoefficientSystem::with_residue_offset(std::size_t index,
                                                         const PrecComplex& delta) const {
  WorkingPrecision prec(cfg_.digits());
  const PrecComplex u = rat_.poles().at(index).u + delta;
  return CoefficientSystem(cfg_, rat_.with_residue(index, u), opts_);
}

CoefficientSystem CoefficientSystem::with_c_scale(double c) const {
  CoefficientOptions o = opts_;
  o.c_scale = c;
  return CoefficientSystem(cfg_, rat_, o);
}

std::size_t CoefficientSystem::pole_index(const Zero& zero) const {
  const std::size_t i = rat_.block_offset(zero.block - 1) + zero.index;
  const auto& p = rat_.poles().at(i);
  if (p.block != zero.block || p.index != zero.index) throw Error("pole table out of order");
  return i;
}

LocalSeries local_series(const CoefficientSystem& sys, const Zero& zero, const Real& h_max) {
  const LacunaryConfig& cfg = sys.cfg();
  std::size_t order = 4;
  if (h_max > 0) {
    const Real t = h_max / local_scale(cfg, zero);
    if (t >= Real(0.5)) throw Error("local series requested too far from the zero");
    const double digits = -to_double(log10(t));
    order = std::min<std::size_t>(600, static_cast<std::size_t>(std::ceil((working_digits() + 10) / digits)) + 3);
    order = std::max<std::size_t>(order, 4);
  }
  LocalSeries s;
  s.zero = zero;
  s.f = taylor_at_zero(cfg, zero, order);
  const auto gt = g_taylor_excluding(sys.rat(), sys.pole_index(zero), order);
  const PrecComplex& u = sys.rat().poles()[sys.pole_index(zero)].u;
  const std::size_t n = order;

  // f / h, known to order n-1
  std::vector<PrecComplex> f1(n);
  for (std::size_t m = 0; m < n; ++m) f1[m] = s.f[m + 1];
  // A0 = u f/h + f g~
  s.a0.assign(n, PrecComplex());
  for (std::size_t m = 0; m < n; ++m) s.a0[m] = u * f1[m];
  for (std::size_t a = 1; a < n; ++a) {
    for (std::size_t b = 0; a + b < n; ++b) s.a0[a + b] = s.a0[a + b] + s.f[a] * gt[b];
  }
  // N = f'' + A0 f', known to order n-2
  std::vector<PrecComplex> d1(n), d2(n - 1);
  for (std::size_t m = 0; m < n; ++m) d1[m] = s.f[m + 1] * Real(static_cast<unsigned long>(m + 1));
  for (std::size_t m = 0; m + 1 < n; ++m) {
    d2[m] = s.f[m + 2] * Real(static_cast<unsigned long>((m + 2) * (m + 1)));
  }
  std::vector<PrecComplex> num(n - 1);
  for (std::size_t m = 0; m + 1 < n; ++m) num[m] = d2[m];
  for (std::size_t a = 0; a + 1 < n; ++a) {
    for (std::size_t b = 0; a + b + 1 < n; ++b) num[a + b] = num[a + b] + s.a0[a] * d1[b];
  }
  // N(0) = f''(xi) + u f'(xi)^2 vanishes by the choice of u.
  num[0] = PrecComplex();
  // B0 = -(N/h) / (f/h), order n-3
  const std::size_t nb = n - 2;
  s.b0.assign(nb, PrecComplex());
  for (std::size_t m = 0; m < nb; ++m) {
    PrecComplex acc = num[m + 1];
    for (std::size_t j = 1; j <= m; ++j) acc = acc - f1[j] * s.b0[m - j];
    s.b0[m] = acc / f1[0];
  }
  for (auto& c : s.b0) c = PrecComplex(-1.0) * c;
  return s;
}

PrecComplex eval_A0(const CoefficientSystem& sys, const PrecComplex& z) {
  WorkingPrecision prec(sys.cfg().digits());
  require_domain(sys, z);
  const auto near = nearest_zero(sys.cfg(), z);
  if (near.index && near.relative_distance < sys.near_zero_delta()) {
    const Zero zero = zero_at(sys.cfg(), near.block, *near.index);
    const PrecComplex h = z - zero.value;
    const auto s = local_series(sys, zero, h.abs());
    return horner(s.a0, h);
  }
  const PrecComplex f = to_value(eval_f(sys.cfg(), z).value);
  return f * eval_g(sys.rat(), z).value;
}

B0Value eval_B0_direct(const CoefficientSystem& sys, const PrecComplex& z) {
  WorkingPrecision prec(sys.cfg().digits());
  require_domain(sys, z);
  const PrecComplex l1 = log_derivative(sys.cfg(), z, 1);
  const PrecComplex l2 = log_derivative(sys.cfg(), z, 2);
  const PrecComplex a0 = eval_A0(sys, z);
  const PrecComplex t1 = l1 * l1;
  const PrecComplex t3 = a0 * l1;
  const PrecComplex s = t1 + l2 + t3;
  const Real big = std::max({t1.abs(), l2.abs(), t3.abs()});
  double lost = 0;
  if (big > 0) {
    lost = s.is_zero() ? double(working_digits()) : to_double(log10(big / s.abs()));
  }
  if (lost > double(working_digits()) / 2) {
    throw CancellationError("B0 quotient lost " + std::to_string(lost) + " digits", lost);
  }
  return B0Value{PrecComplex(-1.0) * s, B0Branch::direct, std::max(lost, 0.0)};
}

PrecComplex eval_B0_removable(const CoefficientSystem& sys, const PrecComplex& z) {
  WorkingPrecision prec(sys.cfg().digits());
  require_domain(sys, z);
  const auto near = nearest_zero(sys.cfg(), z);
  if (!near.index) throw Error("nearest zero is not enumerable");
  const Zero zero = zero_at(sys.cfg(), near.block, *near.index);
  const PrecComplex h = z - zero.value;
  const auto s = local_series(sys, zero, h.abs());
  return horner(s.b0, h);
}

B0Value eval_B0_detail(const CoefficientSystem& sys, const PrecComplex& z) {
  WorkingPrecision prec(sys.cfg().digits());
  const auto near = nearest_zero(sys.cfg(), z);
  if (near.index && near.relative_distance < sys.near_zero_delta()) {
    return B0Value{eval_B0_removable(sys, z), B0Branch::removable, 0};
  }
  return eval_B0_direct(sys, z);
}

PrecComplex eval_B0(const CoefficientSystem& sys, const PrecComplex& z) {
  return eval_B0_detail(sys, z).value;
}

std::pair<PrecComplex, PrecComplex> eval_AB(const CoefficientSystem& sys, const PrecComplex& z) {
  if (!sys.H()) throw ConfigError("no H configured for the perturbed coefficients");
  WorkingPrecision prec(sys.cfg().digits());
  require_domain(sys, z, true);
  const PrecComplex a0 = eval_A0(sys, z);
  const PrecComplex b0 = eval_B0(sys, z);
  const auto d = derivatives(sys.cfg(), z);
  const PrecComplex ch = sys.H()->value(z) * sys.c_scale();
  return {a0 + ch * d[0], b0 - ch * d[1]};
}

Real residual(const CoefficientSystem& sys, const PrecComplex& z, Equation which) {
  WorkingPrecision prec(sys.cfg().digits());
  PrecComplex a, b;
  if (which == Equation::perturbed) {
    std::tie(a, b) = eval_AB(sys, z);
  } else {
    a = eval_A0(sys, z);
    b = eval_B0(sys, z);
  }
  const auto d = derivatives(sys.cfg(), z);
  const PrecComplex t1 = a * d[1];
  const PrecComplex t2 = b * d[0];
  const Real den = d[2].abs() + t1.abs() + t2.abs();
  if (den == 0) return Real(0);
  return (d[2] + t1 + t2).abs() / den;
}

Real residual_tolerance(unsigned digits) { return tenth_power(-double(digits) + 40); }

Real interpolation_defect(const CoefficientSystem& sys, const Zero& zero) {
  WorkingPrecision prec(sys.cfg().digits());
  const auto c = taylor_at_zero(sys.cfg(), zero, 2);
  const PrecComplex f1 = c[1];
  const PrecComplex f2 = c[2] * Real(2);
  const PrecComplex a0 = eval_A0(sys, zero.value);
  const PrecComplex num = a0 * f1 + f2;
  if (num.is_zero()) return Real(0);
  if (!f2.is_zero()) return num.abs() / f2.abs();
  return num.abs() / f1.norm();
}

PrecComplex fprime(const LacunaryConfig& cfg, const PrecComplex& z) {
  WorkingPrecision prec(cfg.digits());
  return derivatives(cfg, z)[1];
}

Real log_cauchy_bound(const LacunaryConfig& cfg, std::size_t k) {
  WorkingPrecision prec(cfg.digits());
  Real s = log(Real(2)) + 1;
  const Real lrk = cfg.block(k).log_radius;
  for (std::size_t j = 1; j < k; ++j) s += cfg.block(j).count * (cfg.block(j).log_radius - lrk);
  return s;
}

CauchyResult cauchy_ratio(const LacunaryConfig& cfg, const Zero& zero, std::size_t nodes) {
  WorkingPrecision prec(cfg.digits());
  if (nodes < 8 || nodes % 2 != 0) throw ConfigError("contour needs an even node count >= 8");
  CauchyResult out;
  const auto d = derivs_at_zero(cfg, zero);
  out.direct = to_value(log_div(d[1], log_mul(d[0], d[0])));

  const PrecComplex& xi = zero.value;
  const Real n = cfg.block(zero.block).count;
  const PrecComplex scale = xi / PrecComplex(n);  // z = xi + scale * zeta
  const Real step = two_pi() / Real(static_cast<unsigned long>(nodes));

  std::vector<PrecComplex> zeta(nodes), fp(nodes);
  Real min_fp = -1;
  Real max_fp = 0;
  for (std::size_t j = 0; j < nodes; ++j) {
    zeta[j] = PrecComplex::polar(Real(1), step * Real(static_cast<unsigned long>(j)));
    fp[j] = fprime(cfg, xi + scale * zeta[j]);
    const Real a = fp[j].abs();
    if (min_fp < 0 || a < min_fp) min_fp = a;
    if (a > max_fp) max_fp = a;
  }
  if (min_fp <= max_fp * tenth_power(-double(working_digits()) / 2)) {
    throw ZeroOnContourError("f' vanishes on the boundary of D_xi around " + to_string(xi.re(), 10) +
                             (xi.im() < 0 ? "" : "+") + to_string(xi.im(), 10) + "i");
  }
  out.min_abs_fprime = min_fp;
  out.contour_bound = n / (xi.abs() * min_fp);

  // Winding number of f' counts its zeros inside the contour.
  Real turn = 0;
  for (std::size_t j = 0; j < nodes; ++j) {
    turn += reduce_angle(fp[(j + 1) % nodes].arg() - fp[j].arg());
  }
  out.enclosed = static_cast<int>(std::lround(to_double(turn / two_pi())));

  // Zeros of f' near the contour, by Newton from points inside and just outside.
  struct Singular {
    PrecComplex z;
    PrecComplex zeta;
    PrecComplex residue;  // of n/(xi zeta f'(z(zeta))) at zeta
  };
  std::vector<Singular> poles;
  const Real tiny = tenth_power(-double(working_digits()) + 8);
  std::vector<PrecComplex> starts;
  {
    // dominant-term model: zf'/f ~ S + n w/(w - 1) = 0 at w = S/(S + n)
    Real S = 0;
    for (std::size_t j = 1; j < zero.block; ++j) S += cfg.block(j).count;
    if (S > 0) starts.push_back(xi * PrecComplex(exp(log(S / (S + n)) / n)));
    for (int a = 0; a < 8; ++a) {
      const PrecComplex dir = PrecComplex::polar(Real(1), two_pi() * Real(a) / 8);
      starts.push_back(xi + scale * dir * PrecComplex(0.5));
      starts.push_back(xi + scale * dir * PrecComplex(1.5));
    }
  }
  for (const auto& start : starts) {
    PrecComplex z = start;
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
      const auto dz = derivatives(cfg, z);
      if (dz[2].is_zero()) break;
      const PrecComplex delta = dz[1] / dz[2];
      z = z - delta;
      if (delta.abs() <= tiny * z.abs()) {
        converged = true;
        break;
      }
    }
    if (!converged) continue;
    const PrecComplex zt = (z - xi) / scale;
    if (zt.abs() > 3) continue;
    bool seen = false;
    for (const auto& p : poles) {
      if ((p.zeta - zt).abs() < tenth_power(-double(working_digits()) / 3)) seen = true;
    }
    if (seen) continue;
    const PrecComplex f2 = derivatives(cfg, z)[2];
    // f'(z(zeta)) ~ f''(z*) scale (zeta - zeta*)
    const PrecComplex res = PrecComplex(n) / (xi * zt * f2 * scale);
    poles.push_back(Singular{z, zt, res});
  }

  // Trapezoid rule on the integrand minus the located simple poles. The
  // subtracted terms have exact means: 0 inside the unit circle, -res/zeta*
  // outside.
  PrecComplex sum_all, sum_even;
  for (std::size_t j = 0; j < nodes; ++j) {
    PrecComplex g = PrecComplex(n) / (xi * zeta[j] * fp[j]);
    for (const auto& p : poles) g = g - p.residue / (zeta[j] - p.zeta);
    sum_all = sum_all + g;
    if (j % 2 == 0) sum_even = sum_even + g;
  }
  const Real count(static_cast<unsigned long>(nodes));
  PrecComplex mean = sum_all / PrecComplex(count);
  PrecComplex mean_half = sum_even / PrecComplex(count / 2);
  PrecComplex correction;
  int inside = 0;
  for (const auto& p : poles) {
    if (p.zeta.abs() > 1) {
      mean = mean - p.residue / p.zeta;
      mean_half = mean_half - p.residue / p.zeta;
    } else {
      ++inside;
      // residue of 1/(f'(z)(z - xi)^2) at z*
      const PrecComplex f2 = derivatives(cfg, p.z)[2];
      correction = correction + PrecComplex(1.0) / (f2 * sqr(p.z - xi));
      out.fprime_zeros.push_back(p.z);
    }
  }
  out.contour = PrecComplex(-1.0) * mean;
  out.contour_corrected = out.contour + correction;
  const Real ref = out.direct.abs();
  out.quadrature_error = (mean - mean_half).abs() / (ref > 0 ? ref : Real(1));
  if (inside != out.enclosed) {
    // Unlocated zeros of f' inside the disk: the corrected value is incomplete.
    out.quadrature_error = std::numeric_limits<Real>::infinity();
  }
  if (out.quadrature_error > Real(1e-6) && inside == out.enclosed) {
    throw QuadratureError("contour quadrature did not converge", to_double(out.quadrature_error),
                          to_double(out.quadrature_error));
  }
  return out;
}

}  // namespace lacunary
