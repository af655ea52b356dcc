#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "gfmswing/core/network_params.hpp"
#include "gfmswing/core/per_unit.hpp"
#include "gfmswing/core/phasor.hpp"

using namespace gfmswing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("per-unit base follows the rating", "[core]") {
  PerUnitBase b;
  CHECK_THAT(b.z_base(), WithinRel(1.6, 1e-15));
  CHECK_THAT(b.omega0(), WithinRel(2.0 * std::numbers::pi * 50.0, 1e-15));
  PerUnitBase bad{0.0, 20.0, 50.0};
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("pu_convert examples", "[core]") {
  const PerUnitBase b;
  CHECK_THAT(pu_convert(1.6, b, Quantity::Impedance), WithinAbs(1.0, 1e-15));
  CHECK(pu_convert(0.0, b, Quantity::Impedance) == 0.0);
  CHECK_THAT(pu_convert(0.95, b, "impedance"), WithinAbs(0.59375, 1e-15));
  CHECK_THAT(pu_convert(250.0, b, "power"), WithinAbs(1.0, 1e-15));
  CHECK_THAT(pu_convert(20.0, b, "voltage"), WithinAbs(1.0, 1e-15));
  CHECK_THROWS_AS(pu_convert(1.0, b, "current"), InputError);
  CHECK_THROWS_AS(from_pu(1.0, b, "flux"), InputError);
}

TEST_CASE("pu_convert round-trips through from_pu", "[core][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> mag(-1e4, 1e4), sb(1.0, 1000.0), vb(0.4, 500.0);
  for (int k = 0; k < 2000; ++k) {
    const PerUnitBase b{sb(rng), vb(rng), 50.0};
    const double x = mag(rng);
    for (Quantity q : {Quantity::Impedance, Quantity::Power, Quantity::Voltage}) {
      const double back = pu_convert(from_pu(x, b, q), b, q);
      REQUIRE_THAT(back, WithinAbs(x, 1e-12 * std::max(1.0, std::abs(x))));
    }
  }
}

TEST_CASE("parallel_reactance examples", "[core]") {
  CHECK_THAT(parallel_reactance({0.35}), WithinAbs(0.35, 1e-15));
  CHECK_THAT(parallel_reactance({0.35, 0.35}), WithinAbs(0.175, 1e-15));
  CHECK_THAT(parallel_reactance({0.35, 0.35, 0.05}), WithinAbs(0.038889, 5e-7));
  CHECK_THAT(parallel_reactance({0.35, 0.35, 0.05}), WithinAbs(1.0 / (1.0 / 0.35 + 1.0 / 0.35 + 1.0 / 0.05), 1e-15));
  CHECK_THROWS_AS(parallel_reactance({0.35, 0.0}), InputError);
  CHECK_THROWS_AS(parallel_reactance({-0.1}), InputError);
  CHECK_THROWS_AS(parallel_reactance(std::span<const double>{}), InputError);
}

TEST_CASE("parallel_reactance is commutative and below its smallest input", "[core][property]") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> x(1e-3, 10.0);
  std::uniform_int_distribution<int> n(1, 6);
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> xs(static_cast<std::size_t>(n(rng)));
    for (auto& v : xs) v = x(rng);
    const double a = parallel_reactance(xs);
    std::vector<double> ys = xs;
    std::shuffle(ys.begin(), ys.end(), rng);
    REQUIRE_THAT(parallel_reactance(ys), WithinRel(a, 1e-13));
    REQUIRE(a <= *std::min_element(xs.begin(), xs.end()) * (1.0 + 1e-15));
  }
}

TEST_CASE("phasor polar and rectangular forms round-trip", "[core][property]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> lg(-6.0, 6.0), ang(-std::numbers::pi, std::numbers::pi);
  for (int k = 0; k < 5000; ++k) {
    const double m = std::pow(10.0, lg(rng));
    const double a = ang(rng);
    const Phasor p = Phasor::polar(m, a);
    REQUIRE_THAT(p.magnitude(), WithinRel(m, 1e-12));
    REQUIRE_THAT(p.angle(), WithinAbs(a, 1e-12));
    const Phasor q = Phasor::polar(p.magnitude(), p.angle());
    REQUIRE_THAT(q.re(), WithinAbs(p.re(), 1e-12 * m));
    REQUIRE_THAT(q.im(), WithinAbs(p.im(), 1e-12 * m));
  }
}

TEST_CASE("phasor invariants", "[core]") {
  CHECK(Phasor(-1.0, 0.0).angle() == std::numbers::pi);
  CHECK(Phasor(-1.0, -0.0).angle() == std::numbers::pi);
  CHECK(Phasor(3.0, 4.0).magnitude() == 5.0);
  CHECK_THROWS_AS(Phasor(std::nan(""), 0.0), InputError);
  CHECK_THROWS_AS(Phasor(0.0, INFINITY), InputError);
  CHECK_THROWS_AS(Phasor(1.0, 0.0) / Phasor(), InputError);
  const Phasor a(1.0, 2.0), b(-0.5, 0.25);
  CHECK((a * b).re() == Catch::Approx(-1.0));
  CHECK((a * b).im() == Catch::Approx(-0.75));
  CHECK(((a / b) * b).re() == Catch::Approx(1.0));
  CHECK(a.conj().im() == -2.0);
  CHECK(jx(0.35) == Phasor(0.0, 0.35));
}

TEST_CASE("angle helpers", "[core]") {
  CHECK_THAT(deg(std::numbers::pi), WithinAbs(180.0, 1e-12));
  CHECK_THAT(rad(90.0), WithinAbs(std::numbers::pi / 2, 1e-15));
  CHECK_THAT(wrap_angle(3.0 * std::numbers::pi), WithinAbs(std::numbers::pi, 1e-12));
  CHECK_THAT(wrap_angle(-std::numbers::pi), WithinAbs(std::numbers::pi, 1e-12));
  CHECK_THAT(wrap_angle(rad(370.0)), WithinAbs(rad(10.0), 1e-12));
}

TEST_CASE("network parameters reject non-physical reactances", "[core]") {
  NetworkParams n;
  CHECK_NOTHROW(n.validate());
  n.x_gnd = -0.05;
  try {
    n.validate();
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.parameter() == "x_gnd");
  }
  n = NetworkParams{};
  n.theta_g1 = 0.0;
  CHECK_THROWS_AS(n.validate(), DomainError);
}
