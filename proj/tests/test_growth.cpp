#include <cmath>
#include <random>

#include "doctest.h"
#include "lacunary/growth.hpp"
#include "oracles.hpp"

using namespace lacunary;
using oracle::pow10;
namespace mp = boost::multiprecision;

namespace {

LogAbsFunction log_abs_f(const LacunaryConfig& cfg) {
  return [cfg](const PrecComplex& z) { return eval_f(cfg, z).value.logmag; };
}

LogAbsFunction log_abs_formula(const LacunaryConfig& cfg) {
  return [cfg](const PrecComplex& z) { return eval_f_formula(cfg, z).logmag; };
}

// ln M(r) for the factorial schedule as a plain double sum of ln(1 + e^{t_j}),
// t_j = n_j (ln r - k! ln 2), n_j = 2^(k!/2) rounded.
double term_sum(double log_r, int blocks) {
  double s = 0;
  double fact = 1;
  for (int k = 1; k <= blocks; ++k) {
    fact *= k;
    const double lr = fact * std::log(2.0);
    const double n = std::round(std::exp(0.5 * lr));
    const double t = n * (log_r - lr);
    s += t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  }
  return s;
}

}  // namespace

TEST_CASE("log_max_modulus reference values") {
  WorkingPrecision p(60);
  const auto c1 = LacunaryConfig::explicit_blocks({{Real(1), 2}}, 0.5, 60);
  const auto m1 = log_max_modulus(log_abs_f(c1), Real(2));
  CHECK(mp::abs(m1.log_value - mp::log(Real(5))) < pow10(-50));
  CHECK(std::abs(std::abs(to_double(m1.theta)) - M_PI / 2) < 1e-5);

  const auto c2 = LacunaryConfig::explicit_blocks({{Real(4), 2}}, 0.5, 60);
  CHECK(mp::abs(log_max_modulus(log_abs_f(c2), Real(8)).log_value - mp::log(Real(5))) < pow10(-50));
}

TEST_CASE("log-domain max modulus against the term sum") {
  WorkingPrecision p(100);
  const auto cfg = make_schedule(0.5, 4, ScheduleRule::factorial);
  const Real log_r = 24 * mp::log(Real(2)) + 1;
  const auto b = log_max_modulus_formula(cfg, log_r);
  const double want = term_sum(to_double(log_r), 7);
  CHECK(std::abs(to_double(b.upper) - want) < 1e-9 * want);
  CHECK(std::abs(want - 4254) < 2);
  CHECK(b.lower <= b.upper);
  // gap is 2 e^{-|t|} from the block with the smallest |t| (here t_1 ~ 17)
  CHECK(b.upper - b.lower < pow10(-10) * b.upper);

  SUBCASE("bounds bracket the sampled maximum") {
    const auto small = make_schedule(0.5, 3, ScheduleRule::factorial);
    for (double r : {3.0, 10.0, 64.0, 100.0, 1000.0}) {
      const Real lr = mp::log(Real(r));
      const auto bb = log_max_modulus_formula(small, lr);
      const auto m = log_max_modulus(log_abs_f(small), Real(r), 720);
      CHECK(m.log_value <= bb.upper + pow10(-60));
      CHECK(m.log_value >= bb.lower - pow10(-60));
    }
  }
}

TEST_CASE("nevanlinna characteristics") {
  WorkingPrecision p(60);
  CHECK(mp::abs(counting_N({Real(1), Real(1)}, mp::exp(Real(1))) - 2) < pow10(-50));
  CHECK(counting_N({Real(2), Real(3)}, Real(1.5)) == 0);

  SUBCASE("m of an entire function is nonnegative") {
    const auto cfg = LacunaryConfig::explicit_blocks({{Real(4), 2}, {Real(16), 4}}, 0.5, 60);
    for (double r : {0.5, 3.0, 10.0, 30.0}) {
      const auto nv = nevanlinna(log_abs_f(cfg), {}, Real(r));
      CHECK(nv.m >= 0);
      CHECK(nv.T == doctest::Approx(nv.m));
    }
  }
  SUBCASE("T(r, g) close to N(r, g) beyond the poles") {
    WorkingPrecision q(100);
    const auto rat = residues_from_f(make_schedule(0.5, 3, ScheduleRule::factorial));
    const auto nv = nevanlinna(rat, Real(6400));
    CHECK(nv.T - to_double(nv.N) < 0.05);
    CHECK(nv.T - to_double(nv.N) >= 0);
    // N(r) = sum ln(r/|z_k|) over 11 poles, written out
    const double want = std::log(3200.0) + 2 * std::log(1600.0) + 8 * std::log(100.0);
    CHECK(to_double(nv.N) == doctest::Approx(want).epsilon(1e-12));
  }
  SUBCASE("property: N nondecreasing, T = m + N") {
    const auto rat = residues_from_f(LacunaryConfig::explicit_blocks({{Real(4), 2}, {Real(16), 4}, {Real(256), 16}}, 0.5, 60));
    double previous = -1;
    for (double r : {1.0, 3.0, 8.0, 20.0, 100.0, 400.0}) {
      const auto nv = nevanlinna(rat, Real(r));
      CHECK(to_double(nv.N) >= previous);
      previous = to_double(nv.N);
      CHECK(std::abs(nv.T - nv.m - to_double(nv.N)) < 2e-6);
    }
  }
}

TEST_CASE("order_scan on the factorial schedule") {
  WorkingPrecision p(100);
  const auto cfg = make_schedule(0.5, 4, ScheduleRule::factorial);
  const auto scan = order_scan(cfg, 4, 7);
  REQUIRE(scan.samples.size() == 8);
  const auto& peak4 = scan.samples[1];
  CHECK(peak4.kind == RadiusKind::peak);
  CHECK(peak4.ratio >= Real(0.4));
  CHECK(peak4.ratio <= Real(0.7));
  CHECK(scan.dips_decreasing);
  CHECK(scan.peaks_approach_rho);
  for (const auto& s : scan.samples) {
    if (s.kind == RadiusKind::peak) {
      CHECK(s.ratio <= Real(0.5));
      CHECK(s.ratio > Real(0.45));
    }
  }
  CHECK(scan.min_dip < Real(0.2));
  // dip ratio from the term sum at r_5 = 2^120
  const double lr5 = 120 * std::log(2.0);
  CHECK(to_double(scan.samples[2].ratio) == doctest::Approx(std::log(term_sum(lr5, 7)) / lr5).epsilon(1e-12));
}

TEST_CASE("polynomial growth ratios decrease toward 0") {
  WorkingPrecision p(60);
  const auto cfg = LacunaryConfig::explicit_blocks({{Real(16), 4}}, 0.5, 60);
  Real previous = 10;
  for (double lr : {5.0, 20.0, 100.0, 1000.0}) {
    const Real ratio = mp::log(log_max_modulus_formula(cfg, Real(lr)).upper) / Real(lr);
    CHECK(ratio < previous);
    previous = ratio;
  }
  CHECK(previous < Real(0.01));
}

TEST_CASE("crg_witness") {
  WorkingPrecision p(100);
  SUBCASE("factorial K = 4, k = 4..7") {
    const auto w = crg_witness(make_schedule(0.5, 4, ScheduleRule::factorial), 0.5, 4, 7);
    REQUIRE(w.a.size() == 4);
    CHECK(w.violation);
    for (std::size_t i = 1; i < w.a.size(); ++i) {
      CHECK(w.a[i] < Real(0.05));
      CHECK(w.a[i] < w.a[i - 1]);
    }
    for (const auto& b : w.b) {
      CHECK(b >= Real(0.3));
      CHECK(b <= Real(1.5));
    }
    // leading term n_4 / (e r_4)^rho
    CHECK(to_double(w.b[0]) == doctest::Approx(std::exp(-0.5)).epsilon(0.05));
  }
  SUBCASE("property: every factorial config with K >= 6 is a violation") {
    for (std::size_t K : {6, 7, 8}) {
      const auto cfg = make_schedule(0.5, K, ScheduleRule::factorial);
      CHECK(crg_witness(cfg, 0.5, 4, K).violation);
      // r_3 = 64 is not yet a dip: a_3 > 1
      CHECK_FALSE(crg_witness(cfg, 0.5, 3, K).violation);
    }
  }
  SUBCASE("single blocks never witness a violation") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 10; ++i) {
      const double r = 2 + 1000 * oracle::unit(rng);
      const auto n = static_cast<std::uint64_t>(std::max(1.0, std::round(std::sqrt(r))));
      const auto cfg = LacunaryConfig::explicit_blocks({{Real(r), n}}, 0.5, 100);
      CHECK_FALSE(crg_witness(cfg, 0.5, 1, 1).violation);
    }
    CHECK_FALSE(crg_witness(make_schedule(0.5, 4, ScheduleRule::factorial), 0.5, 5, 5).violation);
  }
}

TEST_CASE("exclusion disks") {
  WorkingPrecision p(100);
  const auto cfg = make_schedule(0.5, 4, ScheduleRule::factorial);
  const ExclusionModel model(zero_families(cfg, 7));
  SUBCASE("zeros are excluded, midpoints between zeros are not") {
    for (std::size_t k = 1; k <= 4; ++k) {
      const auto& b = cfg.block(k);
      CHECK(model.excluded(zero_at(cfg, k, 0).value));
      CHECK(model.excluded(zero_at(cfg, k, cfg.zero_count(k) - 1).value));
      if (cfg.zero_count(k) > 1) CHECK_FALSE(model.excluded(PrecComplex::polar(b.radius, pi_value() / b.count)));
    }
  }
  SUBCASE("property: membership matches the distance to the nearest zero") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 200; ++i) {
      const std::size_t k = 1 + rng() % 4;
      const auto xi = zero_at(cfg, k, rng() % cfg.zero_count(k));
      const Real rad = model.disk_radius(k - 1);
      const Real d = rad * Real(0.1 + 1.8 * oracle::unit(rng));
      const PrecComplex z = xi.value + PrecComplex::polar(d, two_pi() * Real(oracle::unit(rng)));
      CHECK(model.excluded(z) == (d < rad));
    }
  }
  SUBCASE("budget below r/10 at every scale") {
    for (std::size_t k = 1; k <= 7; ++k) {
      const Block b = *cfg.extended_block(k);
      for (const Real& r : {b.radius, b.radius * 2, b.radius * mp::exp(Real(1))}) {
        CHECK(model.radius_sum(r) / r < Real(0.1));
      }
    }
    const ExclusionModel hm(zero_families(build_H(0.25, 10000)));
    for (double r : {1.0, 100.0, 1e6, 1e12}) CHECK(hm.radius_sum(Real(r)) / Real(r) < Real(0.1));
  }
}

TEST_CASE("indicator_scan") {
  WorkingPrecision p(60);
  SUBCASE("H(rho = 0.25) is positive at r = 10^6") {
    const auto h = build_H(0.25, 10000);
    std::vector<Real> thetas;
    for (int j = 0; j < 360; ++j) thetas.push_back(two_pi() * Real(j) / 360 - pi_value());
    const auto scan = indicator_scan([&](const PrecComplex& z) { return h.log_value(z).logmag; }, 0.25, thetas,
                                     {Real(1e6)}, ExclusionModel(zero_families(h)));
    CHECK(scan.budget_ok);
    REQUIRE(scan.min_ratio);
    CHECK(*scan.min_ratio > 0);
    // the negative axis at 10^6 is near the zero m = 31.6..., so some sample there may be excluded
    std::size_t excluded = 0;
    for (const auto& s : scan.samples) excluded += s.excluded;
    CHECK(excluded <= 1);
  }
  SUBCASE("conjugate symmetry") {
    const auto cfg = LacunaryConfig::explicit_blocks({{Real(4), 2}, {Real(16), 4}}, 0.5, 60);
    std::vector<Real> thetas;
    for (double t : {0.3, 1.1, 2.0, 2.9}) {
      thetas.push_back(Real(t));
      thetas.push_back(Real(-t));
    }
    const auto scan = indicator_scan(log_abs_f(cfg), 0.5, thetas, {Real(5), Real(20), Real(50)},
                                     ExclusionModel(zero_families(cfg, 2)));
    for (std::size_t i = 0; i < scan.samples.size(); i += 2) {
      CHECK(mp::abs(scan.samples[i].ratio - scan.samples[i + 1].ratio) < pow10(-50));
    }
  }
  SUBCASE("lacunary f between dips and peaks") {
    WorkingPrecision q(100);
    const auto cfg = make_schedule(0.5, 4, ScheduleRule::factorial);
    const ExclusionModel model(zero_families(cfg, 8));
    for (std::size_t k = 5; k <= 6; ++k) {
      const Block b = *cfg.extended_block(k);
      // midway between zeros on the circle |z| = r_k, and on the real axis at e r_k
      const auto at_dip = indicator_scan(log_abs_formula(cfg), 0.5, {pi_value() / b.count}, {b.radius}, model);
      const auto at_peak =
          indicator_scan(log_abs_formula(cfg), 0.5, {Real(0)}, {b.radius * mp::exp(Real(1))}, model);
      CHECK_FALSE(at_dip.samples[0].excluded);
      CHECK_FALSE(at_peak.samples[0].excluded);
      CHECK(at_peak.samples[0].ratio > 5 * at_dip.samples[0].ratio);
      // the zero xi = r_k on theta = 0 is excluded
      CHECK(indicator_scan(log_abs_formula(cfg), 0.5, {Real(0)}, {b.radius}, model).samples[0].excluded);
    }
  }
}

TEST_CASE("asymptotics near a circle of zeros") {
  WorkingPrecision p(100);
  const auto cfg = make_schedule(0.5, 4, ScheduleRule::factorial);
  SUBCASE("factorial k = 3") {
    const auto rep = verify_asymptotics(cfg, 3);
    REQUIRE(rep.checks.size() == 4);
    for (const auto& c : rep.checks) {
      INFO(c.name, " ", to_string(c.value, 6), " ", to_string(c.bound, 6));
      CHECK(c.pass);
    }
    CHECK(rep.pass);
    REQUIRE(rep.disks.size() == 2);
    for (const auto& [block, winding, min_fp] : rep.disks) {
      CHECK(winding == 0);
      CHECK(min_fp > 0);
    }
  }
  SUBCASE("factorial k = 4: log derivative within 2 sum n_j / n_k") {
    const auto rep = verify_asymptotics(cfg, 4, 3);
    CHECK(rep.checks[1].pass);
    CHECK(rep.checks[1].value < Real(2.0 * 11 / 4096));
    CHECK(rep.checks[0].value < pow10(-90));
    CHECK(rep.pass);
  }
  SUBCASE("factorial k = 2 has a zero of f' in D_xi") {
    const auto rep = verify_asymptotics(cfg, 2);
    CHECK_FALSE(rep.checks[3].pass);
    CHECK_FALSE(rep.pass);
  }
  SUBCASE("two-block product") {
    const auto two = LacunaryConfig::explicit_blocks({{Real(4), 2}, {Real(16), 4}}, 0.5, 100);
    const auto rep = verify_asymptotics(two, 2);
    CHECK(rep.checks[0].value < pow10(-90));
    CHECK(rep.checks[0].pass);
    // At zeta = -1 the boundary passes w_k = (3/4)^4, next to the zero of f'
    // at w_k = S/(S + n_k) = 1/3: the leading form degenerates and has no finite bound.
    CHECK_FALSE(rep.checks[2].pass);
    CHECK_FALSE(boost::multiprecision::isfinite(rep.checks[2].bound));
    // f'(16) = 3.75 against the leading form 4
    CHECK(mp::abs(fprime(two, PrecComplex(16.0)).abs() - Real(3.75)) < pow10(-90));
  }
  SUBCASE("deterministic for a fixed seed") {
    const auto a = verify_asymptotics(cfg, 3, 11);
    const auto b = verify_asymptotics(cfg, 3, 11);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.checks[i].value == b.checks[i].value);
  }
  CHECK_THROWS_AS(verify_asymptotics(cfg, 1), ConfigError);
  CHECK_THROWS_AS(verify_asymptotics(cfg, 5), ConfigError);
}
