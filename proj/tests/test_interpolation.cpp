#include <complex>
#include <random>

#include "doctest.h"
#include "lacunary/interpolation.hpp"
#include "oracles.hpp"

using namespace lacunary;
using oracle::pow10;
using oracle::rel_err;

namespace {

LacunaryConfig blocks_cfg(std::vector<std::pair<Real, std::uint64_t>> b) {
  return LacunaryConfig::explicit_blocks(b, 0.5, 100);
}

// Pole-by-pole sum written out here so it shares nothing with the library path.
PrecComplex naive_g(const RationalInterpolant& rat, const PrecComplex& z) {
  PrecComplex s;
  for (const auto& p : rat.poles()) s = s + p.u / (z - p.z);
  return s;
}

const RationalInterpolant& factorial4() {
  static const RationalInterpolant rat = [] {
    WorkingPrecision p(100);
    return residues_from_f(make_schedule(0.5, 4, ScheduleRule::factorial));
  }();
  return rat;
}

}  // namespace

TEST_CASE("residues_from_f reference values") {
  WorkingPrecision p(100);
  SUBCASE("1 - z^2") {
    const auto rat = residues_from_f(blocks_cfg({{Real(1), 2}}));
    REQUIRE(rat.poles().size() == 2);
    for (const auto& pole : rat.poles()) CHECK(rel_err(pole.u, PrecComplex(0.5)) < pow10(-98));
    CHECK(rel_err(PrecComplex(rat.c_bound()), PrecComplex(0.5)) < pow10(-98));
  }
  SUBCASE("1 - z") {
    const auto rat = residues_from_f(blocks_cfg({{Real(1), 1}}));
    REQUIRE(rat.poles().size() == 1);
    CHECK(rat.poles()[0].u.is_zero());
  }
  SUBCASE("[(4,2),(16,4)] at 16") {
    const auto rat = residues_from_f(blocks_cfg({{Real(4), 2}, {Real(16), 4}}));
    REQUIRE(rat.poles().size() == 6);
    const auto& pole = rat.poles()[rat.block_offset(1)];
    CHECK(pole.z.re() == 16);
    const PrecComplex want(-Real("1.703125") / Real("14.0625"));
    CHECK(rel_err(pole.u, want) < pow10(-97));
  }
}

TEST_CASE("eval_g on a symmetric pair") {
  WorkingPrecision p(100);
  const auto rat = RationalInterpolant::from_poles(
      {{PrecComplex(1.0), PrecComplex(0.5)}, {PrecComplex(-1.0), PrecComplex(0.5)}});
  CHECK(rel_err(eval_g(rat, PrecComplex(2.0)).value, PrecComplex(Real(2) / 3)) < pow10(-98));
  CHECK(eval_g(rat, PrecComplex(0.0)).value.abs() < pow10(-99));
  const PrecComplex z(Real(1) + pow10(-20));
  const PrecComplex recovered = (z - PrecComplex(1.0)) * eval_g(rat, z).value;
  CHECK(rel_err(recovered, PrecComplex(0.5)) < pow10(-18));
  CHECK_THROWS_AS(eval_g(rat, PrecComplex(Real(1) + pow10(-60))), NearPoleError);
  CHECK(eval_g(rat, PrecComplex(3.0)).tail_bound == 0);
}

TEST_CASE("eval_g domain for schedules") {
  WorkingPrecision p(100);
  const auto& rat = factorial4();
  CHECK(rat.certified_radius() == boost::multiprecision::pow(Real(2), 119));
  CHECK_THROWS_AS(eval_g(rat, PrecComplex(0.0, 1e36)), TailError);
  const auto v = eval_g(rat, PrecComplex(1e30, 0.5));
  CHECK(v.tail_bound > 0);
  CHECK(v.tail_bound < pow10(-10));
}

TEST_CASE("property: far-field expansions agree with the pole-by-pole sum") {
  WorkingPrecision p(100);
  const auto& rat = factorial4();
  std::mt19937_64 rng(17);
  for (int i = 0; i < 40; ++i) {
    // log-uniform moduli from 0.1 to 2^40 cover inner, direct and outer regimes
    const double lr = -2.3 + oracle::unit(rng) * 30.0;
    const double t = oracle::unit(rng) * 6.283185307179586;
    const PrecComplex z = PrecComplex::polar(exp(Real(lr)), Real(t));
    const PrecComplex want = naive_g(rat, z);
    const PrecComplex got = eval_g(rat, z).value;
    // absolute scale: sum |u| / |z - z_k|
    Real scale = 0;
    for (const auto& pole : rat.poles()) scale += pole.u.abs() / (z - pole.z).abs();
    CHECK((got - want).abs() <= pow10(-95) * scale);
  }
}

TEST_CASE("property: conjugate symmetry of g") {
  WorkingPrecision p(100);
  const auto& rat = factorial4();
  std::mt19937_64 rng(23);
  for (int i = 0; i < 30; ++i) {
    const PrecComplex z(oracle::unit(rng) * 300 - 150, oracle::unit(rng) * 300 - 150);
    const PrecComplex a = eval_g(rat, z).value;
    const PrecComplex b = eval_g(rat, z.conj()).value;
    CHECK((a.conj() - b).abs() <= pow10(-95) * (a.abs() + pow10(-200)));
  }
}

TEST_CASE("property: residues are recovered numerically at every pole") {
  WorkingPrecision p(100);
  const auto& rat = factorial4();
  const Real step = 2 * pow10(-50);
  int checked = 0;
  int bad = 0;
  for (std::size_t i = 0; i < rat.poles().size(); i += (i < 11 ? 1 : 37)) {
    const auto& pole = rat.poles()[i];
    // (1/4) sum over h i^m of h g(z_k + h): the four-node contour integral,
    // exact for the pole term and O(h^4) for the regular part.
    PrecComplex recovered;
    PrecComplex h = pole.z * PrecComplex(step, Real(0));
    for (int m = 0; m < 4; ++m) {
      recovered = recovered + h * eval_g(rat, pole.z + h).value;
      h = h * PrecComplex(0.0, 1.0);
    }
    recovered = recovered / PrecComplex(4.0);
    if (rel_err(recovered, pole.u) >= pow10(-25)) ++bad;
    ++checked;
  }
  CHECK(checked > 100);
  CHECK(bad == 0);
}

TEST_CASE("residues are bounded and decay along the schedule") {
  WorkingPrecision p(100);
  const auto& rat = factorial4();
  Real previous_max = -1;
  for (std::size_t k = 1; k <= rat.block_count(); ++k) {
    Real block_max = 0;
    for (std::size_t j = rat.block_offset(k - 1); j < rat.block_offset(k); ++j) {
      const Real a = rat.poles()[j].u.abs();
      CHECK(a <= rat.c_bound());
      if (a > block_max) block_max = a;
    }
    if (k >= 3) CHECK(block_max < previous_max);
    previous_max = block_max;
  }
}

TEST_CASE("check_summability") {
  WorkingPrecision p(100);
  SUBCASE("single pole") {
    const auto rat = RationalInterpolant::from_poles({{PrecComplex(1.0), PrecComplex(1.0)}});
    const auto rep = check_summability(rat);
    CHECK(rep.pass);
    CHECK(rep.total == 1);
  }
  SUBCASE("harmonic poles diverge") {
    std::vector<std::pair<PrecComplex, PrecComplex>> poles;
    for (int k = 1; k <= 10000; ++k) poles.push_back({PrecComplex(double(k)), PrecComplex(1.0)});
    const auto rat = RationalInterpolant::from_poles(poles);
    CHECK_THROWS_AS(check_summability(rat), DivergenceFlag);
  }
  SUBCASE("factorial schedule") {
    const auto rep = check_summability(factorial4());
    CHECK(rep.pass);
    CHECK(rep.block_sums.size() == 4);
    CHECK(rep.tail_bound > 0);
    // u = -16/9 at z = 2 alone contributes 8/9
    CHECK(to_double(rep.block_sums[0]) == doctest::Approx(8.0 / 9.0).epsilon(1e-6));
    CHECK(rep.total < 2);
    // certificate matches an independent partial summation
    Real direct = 0;
    for (const auto& pole : factorial4().poles()) direct += pole.u.abs() / pole.z.abs();
    CHECK(boost::multiprecision::abs(rep.partial - direct) < pow10(-95));
  }
}

TEST_CASE("proximity_m reference values") {
  WorkingPrecision p(60);
  const auto rat = RationalInterpolant::from_poles({{PrecComplex(1.0), PrecComplex(1.0)}});
  CHECK(proximity_m(rat, Real(2)).value == doctest::Approx(0.0));
  const auto c = proximity_m([](const PrecComplex&) { return Real(log(Real(3))); }, Real(5));
  CHECK(c.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));

  // Reference: 2^20-node trapezoid in double precision.
  const int n = 1 << 20;
  double ref = 0;
  for (int j = 0; j < n; ++j) {
    const double t = 2 * 3.141592653589793 * j / n;
    ref += std::max(0.0, -std::log(std::abs(std::polar(0.5, t) - 1.0)));
  }
  ref /= n;
  const auto m = proximity_m(rat, Real(0.5));
  CHECK(m.value > 0);
  CHECK(std::abs(m.value - ref) < 1e-6);

  CHECK_THROWS_AS(proximity_m(rat, Real(1.0005)), NearPoleError);
  CHECK_THROWS_AS(proximity_m(rat, Real(0.5), 4, 1e-14, 64), QuadratureError);
}

TEST_CASE("m(r, g) decays beyond the last circle of poles") {
  WorkingPrecision p(100);
  const auto rat = residues_from_f(make_schedule(0.5, 3, ScheduleRule::factorial));
  double previous = 1e300;
  double last = 0;
  for (int scale : {10, 100, 1000}) {
    last = proximity_m(rat, Real(64 * scale)).value;
    CHECK(last <= previous);
    previous = last;
  }
  CHECK(last < 0.01);
}
