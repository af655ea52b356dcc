#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gfmswing/machines/gfm.hpp"
#include "gfmswing/machines/limiter.hpp"
#include "gfmswing/machines/sg.hpp"

using namespace gfmswing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using C = std::complex<double>;

namespace {

constexpr double kPi = std::numbers::pi;

// Post-fault and faulted Thevenin values of the reference system, computed
// here from the line data rather than taken from the library.
const double kXlPost = 0.30 + 0.35;
const double kXlFault = 0.30 + 1.0 / (1.0 / 0.35 + 1.0 / 0.35 + 1.0 / 0.05);
const double kVgeFault = (1.0 / (1.0 / 0.35 + 1.0 / 0.35 + 1.0 / 0.05)) / 0.175;

// Direct circuit: source v∠d behind r + jx feeding e∠0.
struct Circuit {
  C i, v_pcc, s;
};
Circuit circuit(double d, double v, double e, double x, double r) {
  Circuit c;
  c.i = (std::polar(v, d) - C(e, 0.0)) / C(r, x);
  c.v_pcc = std::polar(v, d) - r * c.i;
  c.s = c.v_pcc * std::conj(c.i);
  return c;
}

}  // namespace

TEST_CASE("unconstrained_current examples", "[machines]") {
  CHECK(unconstrained_current(0.0, 1.0, 1.0, 0.65).magnitude() == 0.0);
  CHECK_THAT(unconstrained_current(rad(40.54), 1.0, 0.2222, 0.3389).magnitude(), WithinAbs(2.489, 1e-3));
  CHECK_THAT(unconstrained_current(rad(90.0), 1.0, 1.0, 0.65).magnitude(), WithinAbs(std::sqrt(2.0) / 0.65, 1e-12));
  CHECK(unconstrained_current(rad(90.0), 1.0, 1.0, 0.65).magnitude() < 2.2);
  CHECK_THROWS_AS(unconstrained_current(0.0, 1.0, 1.0, 0.0), ContractViolation);
}

TEST_CASE("limiter_active examples", "[machines]") {
  CHECK_FALSE(limiter_active(0.0, 1.0, 1.0, 0.65, 1.2));
  CHECK(limiter_active(rad(40.54), 1.0, 0.2222, 0.3389, 1.2));
  CHECK_FALSE(limiter_active(rad(90.0), 1.0, 1.0, 0.65, 2.2));
}

TEST_CASE("compute_re examples", "[machines]") {
  CHECK(compute_re(0.0, 1.0, 1.0, 0.65, 1.2) == 0.0);
  CHECK_THAT(compute_re(rad(90.0), 1.0, 1.0, 0.65, 1.2), WithinAbs(std::sqrt(2.0 / 1.44 - 0.4225), 1e-12));
  CHECK_THAT(compute_re(rad(90.0), 1.0, 1.0, 0.65, 1.2), WithinAbs(0.98305, 1e-5));
  CHECK_THAT(compute_re(rad(180.0), 1.0, 1.0, 0.65, 1.2), WithinAbs(1.5347, 1e-4));
  CHECK_THAT(compute_re(rad(90.0), 1.0, kVgeFault, kXlFault, 1.2), WithinAbs(0.78351, 1e-5));
}

TEST_CASE("limited_current examples", "[machines]") {
  const Phasor a = limited_current(rad(90.0), 1.0, 1.0, 0.65, 0.98305, 1.2);
  CHECK_THAT(a.magnitude(), WithinAbs(1.2, 1e-5));
  CHECK_THAT(deg(a.angle()), WithinAbs(101.527, 1e-3));

  const double r180 = compute_re(kPi, 1.0, 1.0, 0.65, 1.2);
  CHECK_THAT(limited_current(kPi, 1.0, 1.0, 0.65, r180, 1.2).magnitude(), WithinAbs(1.2, 1e-12));

  const Phasor f = limited_current(rad(90.0), 1.0, 0.2222, 0.3389, 0.78351, 1.2);
  CHECK_THAT(f.magnitude(), WithinAbs(1.2, 1e-3));
  CHECK_THAT(deg(f.angle()), WithinAbs(79.14, 1e-2));

  CHECK_THROWS_AS(limited_current(rad(90.0), 1.0, 1.0, 0.65, 0.0, 1.2), ContractViolation);
  CHECK_NOTHROW(limited_current(rad(10.0), 1.0, 1.0, 0.65, 0.0, 1.2));
}

TEST_CASE("current_phase examples", "[machines]") {
  CHECK(current_phase(1.0, 0.0) == 0.0);
  CHECK_THAT(current_phase(0.0, 1.0), WithinAbs(kPi / 2, 1e-15));
  CHECK_THAT(deg(current_phase(1.1757, 0.2398)), WithinAbs(11.527, 5e-3));
  CHECK_THROWS_AS(current_phase(0.0, 0.0), InputError);
  // The phase of the limited current relative to the source angle.
  const double r_e = compute_re(rad(90.0), 1.0, 1.0, 0.65, 1.2);
  const Phasor i = limited_current(rad(90.0), 1.0, 1.0, 0.65, r_e, 1.2);
  const Phasor dq = i * Phasor::polar(1.0, -rad(90.0));
  CHECK_THAT(deg(current_phase(dq.re(), dq.im())), WithinAbs(11.527, 1e-3));
}

TEST_CASE("alpha_angle examples", "[machines]") {
  CHECK(alpha_angle(0.0, 0.65) == 0.0);
  CHECK_THAT(alpha_angle(0.65, 0.65), WithinAbs(kPi / 4, 1e-15));
  CHECK_THAT(deg(alpha_angle(0.98305, 0.65)), WithinAbs(56.527, 1e-3));
}

TEST_CASE("gfm_power_limited examples against the circuit", "[machines]") {
  const double r_post = compute_re(rad(90.0), 1.0, 1.0, kXlPost, 1.2);
  const double p_post = gfm_power_limited(rad(90.0), 1.0, 1.0, kXlPost, r_post, 1.2);
  CHECK_THAT(p_post, WithinAbs(-0.2398, 1e-4));
  CHECK_THAT(p_post, WithinAbs(circuit(rad(90.0), 1.0, 1.0, kXlPost, r_post).s.real(), 1e-12));

  const double r_fault = compute_re(rad(90.0), 1.0, kVgeFault, kXlFault, 1.2);
  const double p_fault = gfm_power_limited(rad(90.0), 1.0, kVgeFault, kXlFault, r_fault, 1.2);
  CHECK_THAT(p_fault, WithinAbs(0.0503, 1e-4));
  CHECK_THAT(p_fault, WithinAbs(circuit(rad(90.0), 1.0, kVgeFault, kXlFault, r_fault).s.real(), 1e-12));

  CHECK_THAT(gfm_power_limited(0.0, 1.0, 1.0, kXlPost, 1e-12, 1.2), WithinAbs(0.0, 1e-11));
}

TEST_CASE("gfm_power_normal examples", "[machines]") {
  CHECK(gfm_power_normal(0.0, 1.0, 1.0, 0.65) == 0.0);
  CHECK_THAT(gfm_power_normal(rad(90.0), 1.0, 1.0, 0.65), WithinAbs(1.5385, 1e-4));
  CHECK_THAT(gfm_power_normal(rad(40.54), 1.0, 1.0, 0.65), WithinAbs(1.0, 1e-3));
}

TEST_CASE("apc_step examples", "[machines]") {
  const PerUnitBase base;
  GfmParams p;
  GfmState s;
  s.delta_psc = 0.3;
  CHECK(apc_step(s, p.p_ref, 1e-3, p, base).delta_psc == 0.3);

  const GfmState n = apc_step(s, p.p_ref - 0.5, 1e-3, p, base);
  CHECK_THAT(n.delta_psc - 0.3, WithinAbs(1.5708e-3, 1e-7));

  GfmParams pi = p;
  pi.variant = GfmVariant::Inertial;
  GfmState a = s, b = s;
  a.p_filt = b.p_filt = 0.7;
  for (int k = 0; k < 1000; ++k) {
    a = apc_step(a, 0.7, 1e-3, p, base);
    b = apc_step(b, 0.7, 1e-3, pi, base);
    REQUIRE_THAT(a.delta_psc, WithinAbs(b.delta_psc, 1e-15));
  }
  CHECK_THROWS_AS(apc_step(s, 0.0, 0.0, p, base), ContractViolation);
}

TEST_CASE("apc_step never wraps the control angle", "[machines]") {
  const PerUnitBase base;
  GfmParams p;
  GfmState s;
  for (int k = 0; k < 5000; ++k) s = apc_step(s, p.p_ref - 2.0, 1e-3, p, base);
  CHECK(s.delta_psc > 2.0 * kPi);
  CHECK_THAT(s.delta_psc, WithinRel(5000 * 1e-3 * base.omega0() * p.k_p * 2.0, 1e-12));
}

TEST_CASE("rpc_step examples", "[machines]") {
  GfmParams p;
  GfmState s;
  CHECK(rpc_step(s, p.q_ref, 1e-3, p).v_cmd == 1.0);
  CHECK_THAT(rpc_step(s, -0.2, 1e-3, p).v_cmd, WithinAbs(1.01, 1e-15));
  CHECK_THAT(rpc_step(s, 0.2, 1e-3, p).v_cmd, WithinAbs(0.99, 1e-15));

  // Inertial: the filter moves toward the measurement, the voltage follows.
  GfmParams pi = p;
  pi.variant = GfmVariant::Inertial;
  GfmState f = rpc_step(s, -0.2, 1e-3, pi);
  CHECK_THAT(f.q_filt, WithinAbs(-0.2 * 31.4e-3, 1e-15));
  CHECK_THAT(f.v_cmd, WithinAbs(1.0 + 0.05 * 0.2 * 31.4e-3, 1e-15));
  for (int k = 0; k < 20000; ++k) f = rpc_step(f, -0.2, 1e-3, pi);
  CHECK_THAT(f.v_cmd, WithinAbs(1.01, 1e-12));
}

TEST_CASE("sg_swing_step examples", "[machines]") {
  const PerUnitBase base;
  SgParams p;
  SgState s{0.4, 0.0};
  CHECK(sg_swing_step(s, p.p_m, 1e-3, p, base) == s);

  SgParams q = p;
  q.d = 0.0;
  q.h = 3.5;
  q.p_m = 1.0;
  CHECK_THAT(sg_rates(s, 0.0, q, base).d_omega, WithinAbs(1.0 / 7.0, 1e-15));
  const double dt = 1e-6;
  CHECK_THAT(sg_swing_step(s, 0.0, dt, q, base).omega_dev / dt, WithinAbs(1.0 / 7.0, 1e-12));

  SgState w{0.4, 0.01};
  SgState n = sg_swing_step(w, p.p_m, 1e-3, p, base);
  CHECK(n.omega_dev < w.omega_dev);
  CHECK(n.omega_dev > 0.0);
  CHECK(n.delta_s > w.delta_s);
}

TEST_CASE("limited current magnitude is i_max whenever the limiter is active", "[machines][property]") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ang(-2 * kPi, 2 * kPi), v(0.5, 1.5), e(0.0, 1.5), x(0.05, 1.0), im(0.3, 3.0);
  int active = 0;
  for (int k = 0; k < 20000; ++k) {
    const double d = ang(rng), vr = v(rng), ve = e(rng), xl = x(rng), i = im(rng);
    if (!limiter_active(d, vr, ve, xl, i)) continue;
    ++active;
    const double r_e = compute_re(d, vr, ve, xl, i);
    REQUIRE(r_e > 0.0);
    REQUIRE_THAT(limited_current(d, vr, ve, xl, r_e, i).magnitude(), WithinAbs(i, 1e-9));
  }
  CHECK(active > 1000);
}

TEST_CASE("current angle equals delta/2 + alpha over the active range", "[machines][property]") {
  const double x_l = kXlPost, i_max = 1.2;
  int active = 0;
  for (int k = 1; k < 3600; ++k) {
    const double d = rad(k * 0.1);
    if (!limiter_active(d, 1.0, 1.0, x_l, i_max)) continue;
    ++active;
    const double r_e = compute_re(d, 1.0, 1.0, x_l, i_max);
    const double alpha = std::atan(r_e / x_l);
    const C i = (std::polar(1.0, d) - C(1.0, 0.0)) / C(r_e, x_l);
    const double err = std::remainder(std::arg(i) - (d / 2 + alpha), 2 * kPi);
    REQUIRE(std::abs(err) < 1e-9);
    REQUIRE(alpha >= 0.0);
    REQUIRE(alpha < kPi / 2);
    REQUIRE(d / 2 + alpha > d / 2);
  }
  // Active between 2*asin(x_l*i_max/2) = 45.9 deg and 314.1 deg.
  CHECK(active == 2681);
  // At the activation boundary r_e = 0, alpha = 0 and the angle is delta/2.
  const double on = 2.0 * std::asin(x_l * i_max / 2.0);
  CHECK(compute_re(on * (1 - 1e-12), 1.0, 1.0, x_l, i_max) == 0.0);
  const C i0 = (std::polar(1.0, on) - C(1.0, 0.0)) / C(0.0, x_l);
  CHECK_THAT(std::remainder(std::arg(i0) - on / 2, 2 * kPi), WithinAbs(0.0, 1e-12));
}

TEST_CASE("closed-form limited power equals the circuit solution", "[machines][property]") {
  std::mt19937_64 rng(20240917);
  std::uniform_real_distribution<double> ang(-kPi, kPi), v(0.8, 1.2), e(0.1, 1.1), x(0.05, 1.0), im(0.5, 2.0);
  int active = 0;
  for (int k = 0; k < 1000; ++k) {
    const double d = ang(rng), vr = v(rng), ve = e(rng), xl = x(rng), i = im(rng);
    const double r_e = compute_re(d, vr, ve, xl, i);
    const double p_circ = circuit(d, vr, ve, xl, r_e).s.real();
    if (r_e > 0.0) {
      ++active;
      REQUIRE_THAT(gfm_power_limited(d, vr, ve, xl, r_e, i), WithinAbs(p_circ, 1e-9));
    } else {
      REQUIRE_THAT(gfm_power_normal(d, vr, ve, xl), WithinAbs(p_circ, 1e-9));
    }
  }
  CHECK(active > 100);
}

TEST_CASE("compute_re is continuous and zero exactly where the limiter is off", "[machines][property]") {
  double prev = compute_re(0.0, 1.0, 1.0, kXlPost, 1.2);
  const int n = 100000;
  for (int k = 1; k <= n; ++k) {
    const double d = 2 * kPi * k / n;
    const double r = compute_re(d, 1.0, 1.0, kXlPost, 1.2);
    REQUIRE((r == 0.0) == !limiter_active(d, 1.0, 1.0, kXlPost, 1.2));
    REQUIRE(std::abs(r - prev) < 0.05);
    prev = r;
  }
}

TEST_CASE("non-inertial loop converges to the power-angle equilibrium", "[machines][property]") {
  const PerUnitBase base;
  GfmParams p;
  const double x_total = 0.475;
  const double target = std::asin(p.p_ref * x_total);
  for (double start_deg : {1.0, 10.0, 27.0, 45.0, 70.0, 89.0}) {
    GfmState s;
    s.delta_psc = rad(start_deg);
    for (int k = 0; k < 10000; ++k)
      s = apc_step(s, gfm_power_normal(s.delta_psc, 1.0, 1.0, x_total), 1e-3, p, base);
    REQUIRE_THAT(s.delta_psc, WithinAbs(target, 1e-9));
  }
}

TEST_CASE("droop voltage solver finds the fixed point", "[machines]") {
  GfmParams p;
  auto q_of_v = [](double v) { return 2.0 * (v - 1.0) + 0.3; };
  auto v = solve_droop_voltage(q_of_v, p, 1.0);
  REQUIRE(v);
  CHECK_THAT(*v, WithinAbs(rpc_voltage(q_of_v(*v), p), 1e-12));
}

TEST_CASE("parameter validation names the parameter", "[machines]") {
  GfmParams p;
  p.i_max = 0.0;
  try {
    p.validate();
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(e.parameter() == "i_max");
  }
  SgParams s;
  s.h = -1.0;
  CHECK_THROWS_AS(s.validate(), DomainError);
}
