#include "lacunary/growth.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include "lacunary/errors.hpp"

namespace lacunary {

namespace mp = boost::multiprecision;

namespace {

Real infinity() { return std::numeric_limits<Real>::infinity(); }

Real tenth(double e) { return mp::pow(Real(10), Real(e)); }

// ln(1 + e^t) without overflow.
Real softplus(const Real& t) { return t > 0 ? t + mp::log1p(mp::exp(-t)) : mp::log1p(mp::exp(t)); }

// ln|e^t - 1|, -inf at t = 0.
Real log_abs_expm1(const Real& t) {
  if (t == 0) return neg_infinity();
  return t > 0 ? t + mp::log1p(-mp::exp(-t)) : mp::log1p(-mp::exp(t));
}

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Blocks of the infinite product that matter at ln r: all of the truncated
// product, then extended blocks until their term drops below the precision floor.
std::vector<Block> relevant_blocks(const LacunaryConfig& cfg, const Real& log_r) {
  std::vector<Block> out(cfg.blocks().begin(), cfg.blocks().end());
  if (cfg.is_finite_product()) return out;
  const Real floor = -Real(working_digits() + 10) * ln10();
  for (std::size_t k = cfg.truncation() + 1;; ++k) {
    std::optional<Block> b;
    try {
      b = cfg.extended_block(k);
    } catch (const ConfigError&) {
      break;
    }
    if (!b) break;
    out.push_back(*b);
    if (b->count * (log_r - b->log_radius) < floor) break;
  }
  return out;
}

}  // namespace

MaxModulus log_max_modulus(const LogAbsFunction& log_abs, const Real& r, std::size_t n_theta) {
  if (n_theta == 0) throw ConfigError("log_max_modulus needs at least one angle");
  const Real step = two_pi() / Real(static_cast<unsigned long>(n_theta));
  auto at = [&](const Real& t) { return log_abs(PrecComplex::polar(r, t)); };
  MaxModulus best{neg_infinity(), 0};
  for (std::size_t j = 0; j < n_theta; ++j) {
    const Real t = step * Real(static_cast<unsigned long>(j));
    const Real v = at(t);
    if (v > best.log_value) best = {v, t};
  }
  // golden section on the bracket around the best grid angle
  const Real inv_phi = (mp::sqrt(Real(5)) - 1) / 2;
  Real lo = best.theta - step;
  Real hi = best.theta + step;
  Real x1 = hi - inv_phi * (hi - lo);
  Real x2 = lo + inv_phi * (hi - lo);
  Real f1 = at(x1);
  Real f2 = at(x2);
  const Real resolution = two_pi() * Real(1e-6);
  while (hi - lo > resolution) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = at(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = at(x1);
    }
  }
  if (f1 > best.log_value) best = {f1, reduce_angle(x1)};
  if (f2 > best.log_value) best = {f2, reduce_angle(x2)};
  return best;
}

LogMaxBounds log_max_modulus_formula(const LacunaryConfig& cfg, const Real& log_r) {
  WorkingPrecision prec(cfg.digits());
  const auto blocks = relevant_blocks(cfg, log_r);
  std::vector<Real> t;
  t.reserve(blocks.size());
  for (const auto& b : blocks) t.push_back(b.count * (log_r - b.log_radius));
  std::size_t star = 0;
  for (std::size_t j = 1; j < t.size(); ++j) {
    if (mp::abs(t[j]) < mp::abs(t[star])) star = j;
  }
  LogMaxBounds out{0, 0};
  for (std::size_t j = 0; j < t.size(); ++j) {
    out.upper += softplus(t[j]);
    out.lower += j == star ? softplus(t[j]) : log_abs_expm1(t[j]);
  }
  return out;
}

Real counting_N(const std::vector<Real>& divisor, const Real& r) {
  Real n = 0;
  for (const auto& a : divisor) {
    if (a <= r) n += mp::log(r / a);
  }
  return n;
}

Nevanlinna nevanlinna(const LogAbsFunction& log_abs, const std::vector<Real>& divisor, const Real& r) {
  Nevanlinna out;
  out.m = proximity_m(log_abs, r).value;
  out.N = counting_N(divisor, r);
  out.T = out.m + to_double(out.N);
  return out;
}

Nevanlinna nevanlinna(const RationalInterpolant& rat, const Real& r) {
  Nevanlinna out;
  out.m = proximity_m(rat, r).value;
  std::vector<Real> moduli;
  moduli.reserve(rat.poles().size());
  for (const auto& p : rat.poles()) moduli.push_back(p.z.abs());
  out.N = counting_N(moduli, r);
  out.T = out.m + to_double(out.N);
  return out;
}

OrderScan order_scan(const LacunaryConfig& cfg, std::size_t k_lo, std::size_t k_hi) {
  WorkingPrecision prec(cfg.digits());
  if (k_lo < 1 || k_hi < k_lo) throw ConfigError("order_scan needs 1 <= k_lo <= k_hi");
  OrderScan out;
  std::vector<Real> dips, peaks;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const auto b = cfg.extended_block(k);
    if (!b) throw ConfigError("order_scan: block " + std::to_string(k) + " is past the product");
    for (auto kind : {RadiusKind::dip, RadiusKind::peak}) {
      OrderSample s;
      s.k = k;
      s.kind = kind;
      s.log_r = kind == RadiusKind::dip ? b->log_radius : b->log_radius + 1;
      s.log_M = log_max_modulus_formula(cfg, s.log_r);
      s.ratio = mp::log(s.log_M.upper) / s.log_r;
      (kind == RadiusKind::dip ? dips : peaks).push_back(s.ratio);
      out.samples.push_back(s);
    }
  }
  out.max_peak = *std::max_element(peaks.begin(), peaks.end());
  out.min_dip = *std::min_element(dips.begin(), dips.end());
  out.dips_decreasing = true;
  for (std::size_t i = 1; i < dips.size(); ++i) out.dips_decreasing = out.dips_decreasing && dips[i] < dips[i - 1];
  out.peaks_approach_rho = true;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    out.peaks_approach_rho = out.peaks_approach_rho &&
                             mp::abs(peaks[i] - cfg.rho()) <= mp::abs(peaks[i - 1] - cfg.rho());
  }
  return out;
}

std::vector<ZeroFamily> zero_families(const LacunaryConfig& cfg, std::size_t blocks) {
  std::vector<ZeroFamily> out;
  for (std::size_t k = 1; k <= blocks; ++k) {
    const auto b = cfg.extended_block(k);
    if (!b) break;
    out.push_back({b->radius, b->count, 0});
  }
  return out;
}

std::vector<ZeroFamily> zero_families(const HProduct& h) {
  std::vector<ZeroFamily> out;
  out.reserve(h.zero_moduli().size());
  for (const auto& a : h.zero_moduli()) out.push_back({a, 1, pi_value()});
  return out;
}

ExclusionModel::ExclusionModel(std::vector<ZeroFamily> families, double scale) : families_(std::move(families)) {
  std::sort(families_.begin(), families_.end(),
            [](const ZeroFamily& a, const ZeroFamily& b) { return a.modulus < b.modulus; });
  radii_.resize(families_.size());
  Real cumulative = 0;
  std::size_t i = 0;
  while (i < families_.size()) {
    std::size_t j = i;
    while (j < families_.size() && families_[j].modulus == families_[i].modulus) cumulative += families_[j++].count;
    for (; i < j; ++i) radii_[i] = Real(scale) * families_[i].modulus / cumulative;
  }
}

bool ExclusionModel::excluded(const PrecComplex& z) const {
  const Real a = z.abs();
  if (a == 0) return false;
  const Real theta = z.arg();
  for (std::size_t i = 0; i < families_.size(); ++i) {
    const auto& fam = families_[i];
    const Real radial = mp::abs(a - fam.modulus);
    if (radial >= radii_[i]) continue;
    // angular offset to the nearest zero of the family
    const Real delta = scaled_angle(theta - fam.phase, fam.count) / fam.count;
    const Real s = mp::sin(delta / 2);
    const Real dist2 = radial * radial + 4 * a * fam.modulus * s * s;
    if (dist2 < radii_[i] * radii_[i]) return true;
  }
  return false;
}

Real ExclusionModel::radius_sum(const Real& r) const {
  Real s = 0;
  for (std::size_t i = 0; i < families_.size() && families_[i].modulus <= r; ++i) s += families_[i].count * radii_[i];
  return s;
}

IndicatorScan indicator_scan(const LogAbsFunction& log_abs, double rho, const std::vector<Real>& thetas,
                             const std::vector<Real>& radii, const ExclusionModel& exclusions) {
  IndicatorScan out;
  out.budget_ok = true;
  for (const auto& r : radii) {
    const Real share = exclusions.radius_sum(r) / r;
    out.budget.emplace_back(r, share);
    out.budget_ok = out.budget_ok && share < Real(0.1);
    const Real scale = mp::pow(r, Real(rho));
    for (const auto& t : thetas) {
      IndicatorSample s;
      s.theta = t;
      s.r = r;
      const PrecComplex z = PrecComplex::polar(r, t);
      s.excluded = exclusions.excluded(z);
      try {
        s.log_abs = log_abs(z);
      } catch (const Error&) {
        if (!s.excluded) throw;
        s.log_abs = neg_infinity();
      }
      s.ratio = s.log_abs / scale;
      if (!s.excluded && (!out.min_ratio || s.ratio < *out.min_ratio)) out.min_ratio = s.ratio;
      out.samples.push_back(s);
    }
  }
  return out;
}

CrgWitness crg_witness(const LacunaryConfig& cfg, double rho, std::size_t k_lo, std::size_t k_hi) {
  WorkingPrecision prec(cfg.digits());
  if (k_lo < 1 || k_hi < k_lo) throw ConfigError("crg_witness needs 1 <= k_lo <= k_hi");
  CrgWitness out;
  const Real r = Real(rho);
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    const auto b = cfg.extended_block(k);
    if (!b) break;
    out.ks.push_back(k);
    out.a.push_back(log_max_modulus_formula(cfg, b->log_radius).upper / mp::exp(r * b->log_radius));
    out.b.push_back(log_max_modulus_formula(cfg, b->log_radius + 1).lower / mp::exp(r * (b->log_radius + 1)));
  }
  if (cfg.is_finite_product()) {
    out.reason = "finite product: a polynomial, ln M(r) ~ n ln r regular in every direction";
    return out;
  }
  if (out.ks.size() < 2) {
    out.reason = "fewer than two blocks in range";
    return out;
  }
  const Real a_max = *std::max_element(out.a.begin(), out.a.end());
  const Real b_min = *std::min_element(out.b.begin(), out.b.end());
  out.violation = a_max < b_min / 3;
  out.reason = out.violation ? "max a_k below a third of min b_k" : "dip ceiling not separated from peak floor";
  return out;
}

AsymptoticsReport verify_asymptotics(const LacunaryConfig& cfg, std::size_t k, std::uint64_t seed,
                                     std::size_t points) {
  WorkingPrecision prec(cfg.digits());
  const std::size_t K = cfg.truncation();
  if (k < 2 || k > K) throw ConfigError("asymptotic checks need 2 <= k <= K");
  if (points == 0) throw ConfigError("asymptotic checks need at least one point");
  AsymptoticsReport out;
  out.k = k;
  const Block& bk = cfg.block(k);
  const Real nk = bk.count;
  const Real floor = tenth(-double(working_digits()) + 10);
  Real S = 0;
  for (std::size_t j = 1; j < k; ++j) S += cfg.block(j).count;

  // ln|w_j| = n_j ln(|z|/r_j) and the discarded part E of zf'/f (infinite when
  // the annulus is not separated from a neighbouring block).
  auto log_w = [&](std::size_t j, const Real& log_abs_z) {
    return cfg.block(j).count * (log_abs_z - cfg.block(j).log_radius);
  };
  auto discarded = [&](const Real& log_abs_z) {
    Real E = 0;
    for (std::size_t j = 1; j <= K; ++j) {
      if (j == k) continue;
      const Real lw = log_w(j, log_abs_z);
      const Real n = cfg.block(j).count;
      if ((j < k && lw <= 0) || (j > k && lw >= 0)) return infinity();
      E += j < k ? n * mp::exp(-lw) / -mp::expm1(-lw) : n * mp::exp(lw) / -mp::expm1(lw);
    }
    return E;
  };

  std::mt19937_64 rng(seed);
  SubCheck c1{"partial product", 0, 0, 0, true};
  SubCheck c2{"log derivative", 0, 0, 2 * S / nk, true};
  for (std::size_t i = 0; i < points; ++i) {
    PrecComplex z;
    for (;;) {
      z = PrecComplex::polar(bk.radius * Real(0.9 + 0.2 * unit(rng)), two_pi() * Real(unit(rng)));
      const auto nz = nearest_zero(cfg, z);
      if (nz.distance > cfg.block(nz.block).radius / cfg.block(nz.block).count) break;
    }
    const Real log_abs_z = mp::log(z.abs());

    // (i) f against the first k blocks
    const LogComplex f = eval_f(cfg, z).value;
    const LogComplex pk = eval_partial_product(cfg, k, z);
    const Real dev1 = (to_value(log_div(f, pk)) - PrecComplex(1.0)).abs();
    Real log_bound1 = 0;
    LogComplex rebuilt = pk;
    for (std::size_t j = k + 1; j <= K; ++j) {
      const Real lw = log_w(j, log_abs_z);
      log_bound1 += mp::log1p(mp::exp(lw));
      const LogComplex w = log_pow(log_from_value(z / PrecComplex(cfg.block(j).radius)), cfg.block(j).count);
      rebuilt = log_mul(rebuilt, log_one_minus(w).value);
    }
    const Real bound1 = mp::expm1(log_bound1);
    const Real identity = (to_value(log_div(rebuilt, f)) - PrecComplex(1.0)).abs();
    c1.value = std::max(c1.value, dev1);
    c1.bound = std::max(c1.bound, bound1);
    c1.scale = std::max(c1.scale, bound1);
    c1.pass = c1.pass && dev1 <= bound1 * (1 + floor) + floor && identity <= floor;

    // (ii) zf'/f against sum_{j<k} n_j + n_k w_k/(w_k - 1)
    const PrecComplex zl = z * log_derivative(cfg, z, 1);
    const PrecComplex wk = to_value(log_pow(log_from_value(z / PrecComplex(bk.radius)), nk));
    const PrecComplex model = PrecComplex(S) + PrecComplex(nk) * wk / (wk - PrecComplex(1.0));
    const Real dev2 = (zl - model).abs() / nk;
    const Real bound2 = discarded(log_abs_z) / nk;
    c2.value = std::max(c2.value, dev2);
    c2.bound = std::max(c2.bound, bound2);
    c2.pass = c2.pass && dev2 <= bound2 * (1 + floor) + floor * (model.abs() / nk + 1) && dev2 <= c2.scale;
  }
  out.checks.push_back(c1);
  out.checks.push_back(c2);

  // (iii) |f'| on the boundary of D_xi against (1/|z|) prod_{j<k} |z/r_j|^{n_j} |n_k w_k + (w_k - 1) S|,
  // which is |f| |zf'/f| / |z| with the partial product and the dominant-term model substituted.
  {
    SubCheck c3{"derivative modulus", 0, 0, S / nk, true};
    const auto count = bk.exact_count();
    const Zero xi = zero_at(cfg, k, count ? *count / 3 : 0);
    const PrecComplex radius = xi.value / PrecComplex(nk);
    for (std::size_t i = 0; i < points; ++i) {
      const PrecComplex z =
          xi.value + radius * PrecComplex::polar(Real(1), two_pi() * Real(static_cast<unsigned long>(i)) /
                                                              Real(static_cast<unsigned long>(points)));
      const Real log_abs_z = mp::log(z.abs());
      const PrecComplex wk = to_value(log_pow(log_from_value(z / PrecComplex(bk.radius)), nk));
      const PrecComplex lead = PrecComplex(nk) * wk + (wk - PrecComplex(1.0)) * PrecComplex(S);
      Real log_model = mp::log(lead.abs()) - log_abs_z;
      Real spread = 0;
      for (std::size_t j = 1; j <= K; ++j) {
        if (j == k) continue;
        const Real lw = log_w(j, log_abs_z);
        if (j < k) {
          log_model += lw;
          spread -= mp::log1p(-mp::exp(-lw));
        } else {
          spread -= mp::log1p(-mp::exp(lw));
        }
      }
      const Real e5 = (wk - PrecComplex(1.0)).abs() * discarded(log_abs_z) / lead.abs();
      const Real bound3 = e5 < 1 ? mp::expm1(spread - mp::log1p(-e5)) : infinity();
      const Real dev3 = mp::abs(mp::exp(mp::log(fprime(cfg, z).abs()) - log_model) - 1);
      c3.value = std::max(c3.value, dev3);
      c3.bound = std::max(c3.bound, bound3);
      c3.pass = c3.pass && mp::isfinite(bound3) && dev3 <= bound3 * (1 + floor) + floor;
    }
    out.checks.push_back(c3);
  }

  // (iv) no zero of f' in D_xi, one zero per block from k to K
  {
    SubCheck c4{"zero-free disk", 0, 0, 0, true};
    bool first = true;
    for (std::size_t j = k; j <= K; ++j) {
      const auto count = cfg.block(j).exact_count();
      const Zero xi = zero_at(cfg, j, count ? *count / 3 : 0);
      int winding = -1;
      Real min_fp = 0;
      try {
        const auto c = cauchy_ratio(cfg, xi);
        winding = c.enclosed;
        min_fp = c.min_abs_fprime;
      } catch (const Error&) {
        // a zero of f' on the contour or an unresolved quadrature both fail the check
      }
      out.disks.emplace_back(j, winding, min_fp);
      c4.value = std::max(c4.value, Real(std::abs(winding)));
      if (first || min_fp < c4.bound) c4.bound = min_fp;
      first = false;
      c4.pass = c4.pass && winding == 0 && min_fp > 0;
    }
    out.checks.push_back(c4);
  }

  out.pass = std::all_of(out.checks.begin(), out.checks.end(), [](const SubCheck& c) { return c.pass; });
  return out;
}

}  // namespace lacunary
