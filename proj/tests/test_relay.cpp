#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gfmswing/machines/limiter.hpp"
#include "gfmswing/relay/blinders.hpp"
#include "gfmswing/relay/logic.hpp"

using namespace gfmswing;
using Catch::Matchers::WithinAbs;

namespace {

constexpr double kPi = std::numbers::pi;

// The blinder dimensions written out for the converter study: reverse
// blinders 0.95/0.90/0.85 ohm, forward ones mirrored further out.
BlinderSet extended() {
  BlinderSet b;
  b.outer = {-2.0, 0.95, -3.0, 3.0};
  b.middle = {-1.7, 0.90, -3.0, 3.0};
  b.inner = {-1.4, 0.85, -3.0, 3.0};
  return b;
}

// Resistive blinders at +-2.0/1.7/1.4 ohm with +-3 ohm caps.
BlinderSet wide_sg() {
  BlinderSet b;
  b.outer = {-2.0, 2.0, -3.0, 3.0};
  b.middle = {-1.7, 1.7, -3.0, 3.0};
  b.inner = {-1.4, 1.4, -3.0, 3.0};
  return b;
}

// Limited-mode impedance circle of the reference system, sampled over one
// revolution of delta/2 + alpha (ohm).
std::vector<ImpedanceSample> circle_trajectory(int n, double period) {
  std::vector<ImpedanceSample> out;
  for (int k = 0; k <= n; ++k) {
    const double a = 2 * kPi * k / n;
    const Phasor z = (jx(0.35) + Phasor::polar(1.0 / 1.2, a)) * 1.6;
    out.push_back({period * k / n, z});
  }
  return out;
}

std::vector<ImpedanceSample> line(double r0, double r1, double x, double t0, double t1, int n) {
  std::vector<ImpedanceSample> out;
  for (int k = 0; k <= n; ++k) {
    const double u = static_cast<double>(k) / n;
    out.push_back({t0 + u * (t1 - t0), Phasor(r0 + u * (r1 - r0), x)});
  }
  return out;
}

Crossing cross(double t, Region from, Region to) { return {t, from, to}; }

}  // namespace

TEST_CASE("measure_impedance examples", "[relay]") {
  const auto z = measure_impedance(Phasor(1.0, 0.0), Phasor(1.0, 0.0), 1.6);
  REQUIRE(z);
  CHECK_THAT(z->re(), WithinAbs(1.6, 1e-15));
  CHECK(z->im() == 0.0);

  // Limited-mode sample at delta = 90 deg on the post-fault network: the
  // relay bus sits x_g1 away from the grid, the converter current is limited.
  const double r_e = compute_re(rad(90.0), 1.0, 1.0, 0.65, 1.2);
  const Phasor i = limited_current(rad(90.0), 1.0, 1.0, 0.65, r_e, 1.2);
  const Phasor v_relay = Phasor(1.0, 0.0) + jx(0.35) * i;
  const auto zl = measure_impedance(v_relay, i, 1.6);
  REQUIRE(zl);
  CHECK_THAT(zl->re() / 1.6, WithinAbs(-0.1665, 1e-4));
  CHECK_THAT(zl->im() / 1.6, WithinAbs(-0.4665, 1e-4));
  CHECK_THAT(zl->re(), WithinAbs(-0.2664, 1e-4));
  CHECK_THAT(zl->im(), WithinAbs(-0.7465, 1e-4));
  // Same point from the circle form: centre j*x_g1 plus v_g / i_max at -angle(i).
  const Phasor circle = jx(0.35) + Phasor::polar(1.0 / 1.2, -i.angle());
  CHECK_THAT(zl->re() / 1.6, WithinAbs(circle.re(), 1e-4));

  CHECK_FALSE(measure_impedance(Phasor(1.0, 0.0), Phasor(0.01, 0.0), 1.6));
  CHECK_FALSE(measure_impedance(Phasor(1.0, 0.0), Phasor(0.02, 0.0), 1.6));
  CHECK(measure_impedance(Phasor(1.0, 0.0), Phasor(0.021, 0.0), 1.6));
}

TEST_CASE("zone_test examples", "[relay]") {
  const BlinderSet ext = blinder_preset("gfm-extended");
  CHECK(ext == extended());
  CHECK(zone_test(Phasor(10.0, 0.0), ext) == Region::Outside);
  CHECK(zone_test(Phasor(0.0, 0.0), ext) == Region::Inner);
  CHECK(zone_test(Phasor(0.92, 0.0), ext) == Region::OuterOnly);
  CHECK(zone_test(Phasor(0.87, 0.0), ext) == Region::OuterMiddle);
  CHECK(zone_test(Phasor(0.0, 0.0), blinder_preset("sg-default")) == Region::Inner);
  CHECK_THROWS_AS(blinder_preset("mho"), InputError);
}

TEST_CASE("blinder nesting is validated", "[relay]") {
  BlinderSet b = extended();
  CHECK_NOTHROW(b.validate());
  b.middle.right = 0.96;
  CHECK_THROWS_AS(b.validate(), DomainError);
  b = extended();
  b.inner.left = -1.8;
  CHECK_THROWS_AS(b.validate(), DomainError);
  for (const auto& name : blinder_preset_names()) CHECK_NOTHROW(blinder_preset(name).validate());
  // Presets scale with the relay base.
  CHECK_THAT(blinder_preset("gfm-extended", 3.2).outer.right, WithinAbs(1.9, 1e-15));
}

TEST_CASE("zone regions are monotone along rays", "[relay][property]") {
  for (const BlinderSet& b : {extended(), wide_sg(), blinder_preset("sg-default")}) {
    for (int k = 0; k < 360; ++k) {
      const double a = rad(k + 0.5);
      const Phasor origin(0.0, b.inner.top ? 0.5 * (*b.inner.top + b.inner.bottom.value_or(0.0)) : 0.0);
      int prev = static_cast<int>(zone_test(origin, b));
      REQUIRE(prev == static_cast<int>(Region::Inner));
      for (int s = 1; s <= 4000; ++s) {
        const int r = static_cast<int>(zone_test(origin + Phasor::polar(s * 2e-3, a), b));
        REQUIRE(r <= prev);
        prev = r;
      }
      REQUIRE(prev == static_cast<int>(Region::Outside));
    }
  }
}

TEST_CASE("detect_crossings examples", "[relay]") {
  const BlinderSet ext = extended();
  CHECK(detect_crossings(line(5.0, 4.0, 0.0, 0.0, 1.0, 100), ext).empty());

  // R falls linearly from 1.0 to 0.8 ohm over 0.2 s: crossings of 0.95 and
  // 0.90 ohm at 0.05 s and 0.10 s, of 0.85 at 0.15 s.
  const auto c = detect_crossings(line(1.0, 0.8, 0.0, 0.0, 0.2, 40), ext);
  REQUIRE(c.size() == 3);
  CHECK_THAT(c[0].t, WithinAbs(0.05, 1e-12));
  CHECK(c[0].from == Region::Outside);
  CHECK(c[0].to == Region::OuterOnly);
  CHECK_THAT(c[1].t, WithinAbs(0.10, 1e-12));
  CHECK(c[1].to == Region::OuterMiddle);
  CHECK_THAT(c[2].t, WithinAbs(0.15, 1e-12));
  CHECK(c[2].to == Region::Inner);

  // Coarse sampling that skips both blinders within one interval still
  // reports single-level events, interpolated in time.
  const auto coarse = detect_crossings(line(1.0, 0.8, 0.0, 0.0, 0.2, 1), ext);
  REQUIRE(coarse.size() == 3);
  CHECK_THAT(coarse[0].t, WithinAbs(0.05, 1e-12));
  CHECK_THAT(coarse[1].t, WithinAbs(0.10, 1e-12));

  // A blocked sample breaks the trajectory.
  auto gap = line(1.0, 0.8, 0.0, 0.0, 0.2, 40);
  gap[10].z_ohm.reset();
  CHECK(detect_crossings(gap, ext).size() == 2);

  auto back = line(1.0, 0.8, 0.0, 0.0, 0.2, 40);
  std::swap(back[3], back[4]);
  CHECK_THROWS_AS(detect_crossings(back, ext), InputError);
}

TEST_CASE("the limited-mode circle never reaches wide resistive blinders", "[relay]") {
  const auto traj = circle_trajectory(7200, 2.0);
  double max_r = 0.0;
  for (const auto& s : traj) max_r = std::max(max_r, s.z_ohm->re());
  CHECK_THAT(max_r, WithinAbs(1.3333, 1e-4));
  CHECK(detect_crossings(traj, wide_sg()).empty());
  CHECK(detect_crossings(traj, blinder_preset("sg-default")).empty());
  CHECK(deepest_region_on_circle(jx(0.35 * 1.6), 1.6 / 1.2, blinder_preset("sg-default")) == Region::Outside);
  // The extended reverse blinders are crossed on every revolution.
  const auto c = detect_crossings(traj, extended());
  CHECK(c.size() == 6);
  CHECK(deepest_region_on_circle(jx(0.35 * 1.6), 1.6 / 1.2, extended()) == Region::Inner);
}

TEST_CASE("psb_evaluate examples", "[relay]") {
  using R = Region;
  const std::vector<Crossing> two = {cross(1.0, R::Outside, R::OuterOnly), cross(1.65, R::OuterOnly, R::OuterMiddle),
                                     cross(2.0, R::OuterMiddle, R::OuterOnly), cross(2.1, R::OuterOnly, R::Outside),
                                     cross(3.0, R::Outside, R::OuterOnly), cross(3.12, R::OuterOnly, R::OuterMiddle)};
  const auto d = psb_evaluate(two, 0.03);
  REQUIRE(d.size() == 2);
  CHECK_THAT(d[0].transit, WithinAbs(0.65, 1e-12));
  CHECK(d[0].verdict == PsbVerdict::Swing);
  CHECK_THAT(d[1].transit, WithinAbs(0.12, 1e-12));
  CHECK(d[1].verdict == PsbVerdict::Swing);

  const auto f = psb_evaluate({cross(1.0, R::Outside, R::OuterOnly), cross(1.001, R::OuterOnly, R::OuterMiddle)}, 0.03);
  REQUIRE(f.size() == 1);
  CHECK(f[0].verdict == PsbVerdict::Fault);

  const auto g = psb_evaluate({cross(30.448, R::Outside, R::OuterOnly), cross(30.527, R::OuterOnly, R::OuterMiddle)}, 0.03);
  REQUIRE(g.size() == 1);
  CHECK_THAT(g[0].transit, WithinAbs(0.079, 1e-9));
  CHECK(g[0].verdict == PsbVerdict::Swing);

  // Middle entry with no outer entry seen: warning, treated as a fault.
  const auto m = psb_evaluate({cross(1.0, R::OuterOnly, R::OuterMiddle)}, 0.03);
  REQUIRE(m.size() == 1);
  CHECK(m[0].malformed);
  CHECK(m[0].verdict == PsbVerdict::Fault);
  RelayConfig cfg;
  cfg.blinders = extended();
  const RelayLog log = evaluate_relay(line(0.92, 0.5, 0.0, 0.0, 1.0, 100), cfg);
  CHECK(log.warnings.size() == 1);
  CHECK_FALSE(log.psb_detected());
}

TEST_CASE("psb re-arms only after leaving the outer zone", "[relay]") {
  using R = Region;
  const std::vector<Crossing> c = {cross(1.0, R::Outside, R::OuterOnly), cross(1.1, R::OuterOnly, R::OuterMiddle),
                                   cross(1.2, R::OuterMiddle, R::OuterOnly), cross(1.3, R::OuterOnly, R::OuterMiddle)};
  CHECK(psb_evaluate(c, 0.03).size() == 1);
}

TEST_CASE("ost_evaluate examples", "[relay]") {
  using R = Region;
  // Stable swing: enters the middle zone slowly and leaves again.
  const std::vector<Crossing> stable = {cross(1.0, R::Outside, R::OuterOnly), cross(1.2, R::OuterOnly, R::OuterMiddle),
                                        cross(1.5, R::OuterMiddle, R::OuterOnly), cross(1.7, R::OuterOnly, R::Outside)};
  CHECK_FALSE(ost_evaluate(stable, psb_evaluate(stable, 0.03)));

  // Unstable swing: continues into the inner zone.
  const std::vector<Crossing> unstable = {cross(1.0, R::Outside, R::OuterOnly),
                                          cross(1.2, R::OuterOnly, R::OuterMiddle),
                                          cross(1.4, R::OuterMiddle, R::Inner)};
  const auto t = ost_evaluate(unstable, psb_evaluate(unstable, 0.03));
  REQUIRE(t);
  CHECK(*t == 1.4);

  // A fault jumps the zones quickly: no swing verdict, no trip.
  const std::vector<Crossing> fault = {cross(1.0, R::Outside, R::OuterOnly), cross(1.001, R::OuterOnly, R::OuterMiddle),
                                       cross(1.002, R::OuterMiddle, R::Inner)};
  CHECK_FALSE(ost_evaluate(fault, psb_evaluate(fault, 0.03)));
}

TEST_CASE("relay on a synthetic converter swing", "[relay]") {
  RelayConfig cfg;
  cfg.blinders = extended();
  // One revolution of the circle in 6 s: both converter presets behave as
  // the design guideline predicts.
  const RelayLog ext = evaluate_relay(circle_trajectory(6000, 6.0), cfg);
  CHECK(ext.psb_detected());
  CHECK(ext.ost_tripped());
  for (const auto& d : ext.psb) CHECK(d.transit > 0.03);

  cfg.blinders = blinder_preset("sg-default");
  const RelayLog sg = evaluate_relay(circle_trajectory(6000, 6.0), cfg);
  CHECK(sg.crossings.empty());
  CHECK_FALSE(sg.psb_detected());
  CHECK_FALSE(sg.ost_tripped());
}

TEST_CASE("reverse_blinder_bound examples", "[relay]") {
  const auto b = reverse_blinder_bound(0.35, kPi / 2, 1.0, 1.2, 1.6);
  CHECK_THAT(b.pu, WithinAbs(0.8333, 1e-4));
  CHECK_THAT(b.ohm, WithinAbs(1.3333, 1e-4));
  CHECK_THAT(reverse_blinder_bound(0.35, kPi / 2, 1.0, 1e12, 1.6).pu, WithinAbs(0.35 * std::cos(kPi / 2), 1e-11));
  CHECK_THAT(reverse_blinder_bound(0.35, rad(80.0), 1.0, 1e12, 1.6).pu, WithinAbs(0.35 * std::cos(rad(80.0)), 1e-11));
  CHECK_THAT(reverse_blinder_bound(0.35, rad(80.0), 1.0, 1.2, 1.6).pu, WithinAbs(0.8941, 1e-4));
  CHECK_THROWS_AS(reverse_blinder_bound(0.35, kPi / 2, 1.0, 0.0, 1.6), ContractViolation);

  CHECK(blinders_within_bound(extended(), b));
  CHECK_FALSE(blinders_within_bound(wide_sg(), b));
}

TEST_CASE("blinders inside the bound are crossed by half revolutions through the reverse side", "[relay][property]") {
  // The impedance point sits at -(delta/2 + alpha) on the circle. Any half
  // revolution that passes the right-most point of the circle starts or ends
  // left of the origin's real part, so it must cross every reverse blinder
  // that lies below the bound.
  const BlinderSet ext = extended();
  REQUIRE(blinders_within_bound(ext, reverse_blinder_bound(0.35, kPi / 2, 1.0, 1.2, 1.6)));
  int arcs = 0;
  for (double start = -kPi; start <= 0.0; start += 0.01) {
    std::vector<ImpedanceSample> half;
    for (int k = 0; k <= 2000; ++k) {
      const double a = start + kPi * k / 2000.0;
      half.push_back({k * 1e-4, (jx(0.35) + Phasor::polar(1.0 / 1.2, a)) * 1.6});
    }
    bool crossed[4] = {false, false, false, false};
    for (const auto& c : detect_crossings(half, ext)) crossed[static_cast<int>(c.boundary())] = true;
    REQUIRE(crossed[static_cast<int>(Region::OuterOnly)]);
    REQUIRE(crossed[static_cast<int>(Region::OuterMiddle)]);
    REQUIRE(crossed[static_cast<int>(Region::Inner)]);
    ++arcs;
  }
  CHECK(arcs > 300);
  // Blinders beyond the bound are never crossed, whatever the arc.
  CHECK(detect_crossings(circle_trajectory(7200, 1.0), wide_sg()).empty());
}

TEST_CASE("relay log is time-ordered line-delimited JSON", "[relay]") {
  RelayConfig cfg;
  cfg.blinders = extended();
  const RelayLog log = evaluate_relay(circle_trajectory(6000, 6.0), cfg);
  std::ostringstream os;
  write_relay_jsonl(os, log);
  std::istringstream is(os.str());
  std::string l;
  double prev = -1.0;
  int n = 0, ost = 0;
  while (std::getline(is, l)) {
    const auto j = nlohmann::json::parse(l);
    REQUIRE(j.contains("t"));
    REQUIRE(j.contains("event"));
    REQUIRE(j.contains("zone"));
    REQUIRE(j.contains("verdict"));
    REQUIRE(j["t"].get<double>() >= prev);
    prev = j["t"].get<double>();
    if (j["event"] == "ost") ++ost;
    ++n;
  }
  CHECK(n == static_cast<int>(log.crossings.size() + log.psb.size() + 1));
  CHECK(ost == 1);
}
