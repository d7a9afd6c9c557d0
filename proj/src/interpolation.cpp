#include "lacunary/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lacunary {

namespace mp = boost::multiprecision;

namespace {

// Groups smaller than this are always summed pole by pole.
constexpr std::size_t kExpansionMinSize = 32;
// Expansions are used when |z| / R (or R / |z|) is at most 1/16.
constexpr int kExpansionRatio = 16;

Real infinity() { return std::numeric_limits<Real>::infinity(); }

std::size_t expansion_terms() {
  return static_cast<std::size_t>(
             std::ceil((working_digits() + 10) * std::log(10.0) / std::log(double(kExpansionRatio)))) +
         1;
}

PrecComplex residue_at(const LacunaryConfig& cfg, const Zero& zero) {
  const auto d = derivs_at_zero(cfg, zero);
  return to_value(log_div(log_neg(d[1]), log_mul(d[0], d[0])));
}

PrecComplex pole_term(const Pole& p, const PrecComplex& z) {
  const PrecComplex diff = z - p.z;
  const Real dist = diff.abs();
  const Real rel = dist / p.z.abs();
  if (rel < mp::pow(Real(10), -static_cast<long>(working_digits() / 2))) {
    throw NearPoleError("point within relative " + to_string(rel, 6) + " of a pole");
  }
  return p.u / diff;
}

}  // namespace

void RationalInterpolant::build_groups() {
  groups_.clear();
  const std::size_t terms = expansion_terms();
  for (std::size_t b = 0; b + 1 < offsets_.size(); ++b) {
    Group g;
    g.begin = offsets_[b];
    g.end = offsets_[b + 1];
    if (g.begin == g.end) continue;
    g.radius = poles_[g.begin].z.abs();
    g.abs_residue_sum = 0;
    for (std::size_t j = g.begin; j < g.end; ++j) g.abs_residue_sum += poles_[j].u.abs();
    if (g.end - g.begin >= kExpansionMinSize) {
      g.inner.assign(terms, PrecComplex());
      g.outer.assign(terms, PrecComplex());
      for (std::size_t j = g.begin; j < g.end; ++j) {
        const PrecComplex inv = PrecComplex(1.0) / poles_[j].z;
        PrecComplex a = poles_[j].u * inv;
        PrecComplex b = poles_[j].u;
        for (std::size_t m = 0; m < terms; ++m) {
          g.inner[m] = g.inner[m] + a;
          g.outer[m] = g.outer[m] + b;
          a = a * inv;
          b = b * poles_[j].z;
        }
      }
    }
    groups_.push_back(std::move(g));
  }
}

RationalInterpolant RationalInterpolant::from_config(const LacunaryConfig& cfg) {
  WorkingPrecision prec(cfg.digits());
  RationalInterpolant rat;
  rat.c_bound_ = 0;
  rat.partial_ = 0;
  for (std::size_t k = 1; k <= cfg.truncation(); ++k) {
    for (const auto& zero : zeros(cfg, k)) {
      const PrecComplex u = residue_at(cfg, zero);
      const Real au = u.abs();
      if (au > rat.c_bound_) rat.c_bound_ = au;
      rat.partial_ += au / zero.value.abs();
      rat.poles_.push_back(Pole{zero.value, u, k, zero.index});
    }
    rat.offsets_.push_back(rat.poles_.size());
  }
  rat.schedule_ = !cfg.is_finite_product();
  if (rat.schedule_) {
    // sum_{k>K} n_k / r_k <= r_{K+1}^{s-1} sum_{k>K} n_k / r_k^s
    const Real s = cfg.certificate_exponent();
    const Real weight = exp((s - 1) * cfg.next_block()->log_radius);
    rat.sum_tail_ = rat.c_bound_ * weight * cfg.sigma_tail();
    // |z - z_k| >= |z_k| / 2 inside the certified radius
    rat.eval_tail_ = 2 * rat.sum_tail_;
    rat.certified_radius_ = cfg.certified_radius();
  } else {
    rat.sum_tail_ = 0;
    rat.eval_tail_ = 0;
    rat.certified_radius_ = infinity();
  }
  rat.certificate_ = rat.partial_ + rat.sum_tail_;
  rat.build_groups();
  return rat;
}

RationalInterpolant RationalInterpolant::from_poles(
    const std::vector<std::pair<PrecComplex, PrecComplex>>& poles) {
  RationalInterpolant rat;
  rat.c_bound_ = 0;
  rat.partial_ = 0;
  std::uint64_t i = 0;
  for (const auto& [z, u] : poles) {
    if (z.is_zero()) throw ConfigError("pole at the origin");
    if (u.abs() > rat.c_bound_) rat.c_bound_ = u.abs();
    rat.partial_ += u.abs() / z.abs();
    rat.poles_.push_back(Pole{z, u, 0, i++});
    rat.offsets_.push_back(rat.poles_.size());
  }
  std::vector<const PrecComplex*> sorted;
  for (const auto& p : rat.poles_) sorted.push_back(&p.z);
  std::sort(sorted.begin(), sorted.end(), [](const PrecComplex* a, const PrecComplex* b) {
    return a->re() < b->re() || (a->re() == b->re() && a->im() < b->im());
  });
  for (std::size_t a = 1; a < sorted.size(); ++a) {
    if (sorted[a]->re() == sorted[a - 1]->re() && sorted[a]->im() == sorted[a - 1]->im()) {
      throw ConfigError("repeated pole");
    }
  }
  rat.sum_tail_ = 0;
  rat.eval_tail_ = 0;
  rat.certified_radius_ = infinity();
  if (rat.poles_.size() >= 4) {
    // Exponent of convergence fitted from the counting function at the last
    // pole and at the median one.
    std::vector<Real> moduli;
    for (const auto& p : rat.poles_) moduli.push_back(p.z.abs());
    std::sort(moduli.begin(), moduli.end());
    const std::size_t n = moduli.size();
    const std::size_t half = n / 2;
    const Real spread = log(moduli[n - 1] / moduli[half - 1]);
    double sigma = std::numeric_limits<double>::infinity();
    if (spread > 0) sigma = std::log(double(n) / double(half)) / to_double(spread);
    rat.exponent_estimate_ = sigma;
    if (sigma < 1) {
      // C * int_{|z_N|}^inf dN(t)/t with N(t) = N (t/|z_N|)^sigma
      rat.sum_tail_ = rat.c_bound_ * Real(n) / moduli[n - 1] * Real(sigma / (1 - sigma));
    } else {
      rat.sum_tail_ = infinity();
    }
  }
  rat.certificate_ = rat.partial_ + rat.sum_tail_;
  rat.build_groups();
  return rat;
}

RationalInterpolant RationalInterpolant::with_residue(std::size_t index,
                                                      const PrecComplex& u) const {
  RationalInterpolant out = *this;
  out.poles_.at(index).u = u;
  out.c_bound_ = 0;
  out.partial_ = 0;
  for (const auto& p : out.poles_) {
    if (p.u.abs() > out.c_bound_) out.c_bound_ = p.u.abs();
    out.partial_ += p.u.abs() / p.z.abs();
  }
  if (schedule_ && c_bound_ > 0) {
    out.sum_tail_ = sum_tail_ / c_bound_ * out.c_bound_;
    out.eval_tail_ = 2 * out.sum_tail_;
  }
  out.certificate_ = out.partial_ + out.sum_tail_;
  out.build_groups();
  return out;
}

RationalInterpolant residues_from_f(const LacunaryConfig& cfg) {
  return RationalInterpolant::from_config(cfg);
}

GValue eval_g(const RationalInterpolant& rat, const PrecComplex& z) {
  const Real az = z.abs();
  if (az > rat.certified_radius()) {
    throw TailError("g evaluated outside |z| <= " + to_string(rat.certified_radius(), 6));
  }
  const auto& poles = rat.poles();
  PrecComplex sum;
  for (const auto& g : rat.groups()) {
    if (!g.inner.empty() && az * kExpansionRatio <= g.radius) {
      // sum_j u_j / (z - z_j) = -sum_m z^m sum_j u_j z_j^{-(m+1)}
      PrecComplex acc;
      for (std::size_t m = g.inner.size(); m-- > 0;) acc = acc * z + g.inner[m];
      sum = sum - acc;
    } else if (!g.outer.empty() && az >= g.radius * kExpansionRatio) {
      const PrecComplex w = PrecComplex(1.0) / z;
      PrecComplex acc;
      for (std::size_t m = g.outer.size(); m-- > 0;) acc = acc * w + g.outer[m];
      sum = sum + acc * w;
    } else {
      for (std::size_t j = g.begin; j < g.end; ++j) sum = sum + pole_term(poles[j], z);
    }
  }
  return GValue{sum, rat.eval_tail_bound()};
}

PrecComplex eval_g_direct(const RationalInterpolant& rat, const PrecComplex& z) {
  PrecComplex sum;
  for (const auto& p : rat.poles()) sum = sum + pole_term(p, z);
  return sum;
}

std::vector<PrecComplex> g_taylor_excluding(const RationalInterpolant& rat, std::size_t skip,
                                            std::size_t order) {
  const auto& poles = rat.poles();
  const PrecComplex& xi = poles.at(skip).z;
  std::vector<PrecComplex> c(order + 1);
  for (std::size_t j = 0; j < poles.size(); ++j) {
    if (j == skip) continue;
    // 1/(h + a) = sum_m (-h)^m / a^{m+1}, a = xi - z_j
    const PrecComplex inv = PrecComplex(1.0) / (xi - poles[j].z);
    const PrecComplex step = PrecComplex(-1.0) * inv;
    PrecComplex p = poles[j].u * inv;
    for (std::size_t m = 0; m <= order; ++m) {
      c[m] = c[m] + p;
      p = p * step;
    }
  }
  return c;
}

SummabilityReport check_summability(const RationalInterpolant& rat) {
  SummabilityReport rep;
  rep.partial = 0;
  for (std::size_t b = 1; b <= rat.block_count(); ++b) {
    Real s = 0;
    for (std::size_t j = rat.block_offset(b - 1); j < rat.block_offset(b); ++j) {
      s += rat.poles()[j].u.abs() / rat.poles()[j].z.abs();
    }
    rep.block_sums.push_back(s);
    rep.partial += s;
  }
  rep.exponent_estimate = rat.exponent_estimate();
  if (rep.exponent_estimate && *rep.exponent_estimate >= 1) {
    throw DivergenceFlag("pole moduli have exponent of convergence about " +
                             std::to_string(*rep.exponent_estimate) + " >= 1",
                         *rep.exponent_estimate);
  }
  rep.tail_bound = rat.summability_tail();
  rep.total = rep.partial + rep.tail_bound;
  rep.pass = mp::isfinite(rep.total);
  return rep;
}

ProximityResult proximity_m(const LogAbsFunction& log_abs, const Real& r, std::size_t nodes,
                            double tol, std::size_t node_cap) {
  if (nodes == 0 || r <= 0) throw ConfigError("proximity_m needs r > 0 and at least one node");
  const Real step0 = two_pi() / Real(static_cast<unsigned long>(nodes));
  auto log_plus = [&](const Real& t) {
    const Real v = log_abs(PrecComplex::polar(r, t));
    if (is_neg_inf(v) || v <= 0) return 0.0;
    return to_double(v);
  };
  double sum = 0;
  for (std::size_t j = 0; j < nodes; ++j) sum += log_plus(step0 * Real(static_cast<unsigned long>(j)));
  double estimate = sum / double(nodes);
  double previous = estimate;
  std::size_t n = nodes;
  while (true) {
    if (2 * n > node_cap) {
      throw QuadratureError("trapezoid rule did not converge within " + std::to_string(node_cap) +
                                " nodes",
                            previous, estimate);
    }
    // midpoints of the current nodes
    const Real step = two_pi() / Real(static_cast<unsigned long>(n));
    double mid = 0;
    for (std::size_t j = 0; j < n; ++j) {
      mid += log_plus(step * (Real(static_cast<unsigned long>(j)) + Real(0.5)));
    }
    sum += mid;
    n *= 2;
    const double next = sum / double(n);
    if (std::abs(next - estimate) < tol) return ProximityResult{next, n, estimate};
    previous = estimate;
    estimate = next;
  }
}

ProximityResult proximity_m(const RationalInterpolant& rat, const Real& r, std::size_t nodes,
                            double tol, std::size_t node_cap) {
  for (const auto& g : rat.groups()) {
    if (mp::abs(r - g.radius) < g.radius / 1000) {
      throw NearPoleError("quadrature radius " + to_string(r, 6) + " within 1e-3 of pole modulus " +
                          to_string(g.radius, 6));
    }
  }
  for (const auto& p : rat.poles()) {
    const Real m = p.z.abs();
    if (mp::abs(r - m) < m / 1000) {
      throw NearPoleError("quadrature radius within 1e-3 of a pole modulus");
    }
  }
  return proximity_m(
      [&](const PrecComplex& z) {
        const PrecComplex v = eval_g(rat, z).value;
        return v.is_zero() ? neg_infinity() : Real(log(v.abs()));
      },
      r, nodes, tol, node_cap);
}

}  // namespace lacunary
