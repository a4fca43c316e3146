#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "l96/attractor.hpp"
#include "l96/errors.hpp"
#include "l96/integrator.hpp"
#include "l96/poincare.hpp"
#include "l96/spectral.hpp"

using namespace l96;

namespace {

constexpr double kPi = std::numbers::pi;

Trajectory settle(const SystemConfig& cfg, const StateVec& x0, double transient, double span) {
  IntegrationSpec s;
  s.transient = transient;
  s.t_end = transient + span;
  return integrate(cfg, x0, s);
}

Section mean_section(const Trajectory& tr) {
  const std::vector<double> x1 = tr.coordinate(0);
  Section s;
  s.level = std::accumulate(x1.begin(), x1.end(), 0.0) / static_cast<double>(x1.size());
  return s;
}

double product_modulus(const PeriodicOrbit& o) {
  double p = 1.0;
  for (const auto& mu : o.floquet) p *= std::abs(mu);
  return p;
}

// Largest nearest-neighbour gap relative to the diameter of a point cloud.
double relative_gap(const std::vector<StateVec>& pts) {
  double diameter = 0.0, gap = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double nearest = 1e300;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (k == i) continue;
      const double d = (pts[i] - pts[k]).norm();
      nearest = std::min(nearest, d);
      diameter = std::max(diameter, d);
    }
    gap = std::max(gap, nearest);
  }
  return gap / diameter;
}

}  // namespace

TEST_CASE("section crossings of a circle") {
  Trajectory tr;
  const double dt = 1.0 / 64.0;
  for (int i = 0; i * dt <= 30.0; ++i) {
    const double t = i * dt;
    StateVec x(2), d(2);
    x << std::cos(t), std::sin(t);
    d << -std::sin(t), std::cos(t);
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.derivatives.push_back(d);
  }
  Section up{0, 0.0, CrossingDirection::Up};
  const auto c = detect_crossings(tr, up);
  REQUIRE(c.size() == 5u);
  for (std::size_t k = 0; k < c.size(); ++k) {
    CHECK(std::abs(c[k].t - (1.5 * kPi + 2 * kPi * k)) <= 1e-8);
    CHECK(std::abs(c[k].x[0]) <= 1e-8);
    CHECK(c[k].x[1] == doctest::Approx(-1.0));
  }
  Section down{0, 0.0, CrossingDirection::Down};
  const auto d = detect_crossings(tr, down);
  REQUIRE(d.size() == 5u);
  CHECK(std::abs(d[0].t - 0.5 * kPi) <= 1e-8);
  Section both{0, 0.0, CrossingDirection::Both};
  CHECK(detect_crossings(tr, both).size() == 10u);
  Section bad{2, 0.0, CrossingDirection::Up};
  CHECK_THROWS_AS(detect_crossings(tr, bad), InvalidArgument);
}

TEST_CASE("crossings on a two-torus fill a closed curve") {
  LyapunovOptions lo;
  lo.horizon = 500;
  ScanOptions o;
  o.first = lo;
  o.warm = lo;
  o.warm.transient = 200;
  const ScanResult r = scan_F({6, 0.0, 0.0}, 5.3, 5.6, 4, true, o);
  REQUIRE(r.points.back().cls.code() == "Q2");
  const SystemConfig cfg{6, 5.6, 0.0};
  const Trajectory tr = settle(cfg, r.points.back().cls.evidence.final_state, 100, 1500);
  const auto c = detect_crossings(tr, Section{0, 0.0, CrossingDirection::Up});
  REQUIRE(c.size() > 200u);
  std::vector<StateVec> pts;
  for (const auto& e : c) pts.push_back(e.x);
  // Not a finite set: no two of the first crossings coincide.
  double closest = 1e300;
  for (std::size_t i = 1; i < 50; ++i) closest = std::min(closest, (pts[i] - pts[0]).norm());
  CHECK(closest > 1e-6);
  CHECK(relative_gap(pts) < 0.05);
}

TEST_CASE("chaotic return points for n = 5") {
  const SystemConfig cfg{5, 6.72, 0.0};
  const Trajectory tr = settle(cfg, cold_start(cfg), 500, 2000);
  const auto c = detect_crossings(tr, Section{0, 5.0, CrossingDirection::Up});
  CHECK(c.size() > 100u);
  for (const auto& e : c) CHECK(std::abs(e.x[0] - 5.0) < 1e-9);
}

TEST_CASE("return map lands on the section") {
  const SystemConfig cfg{5, 3.5, 0.0};
  const Trajectory tr = settle(cfg, cold_start(cfg), 500, 50);
  const Section s = mean_section(tr);
  ReturnMap map(cfg, s, 1.0 / 64.0, 100.0);
  ReturnLeg leg;
  const StateVec y = map.next(tr.states.back(), &leg);
  CHECK(std::abs(y[0] - s.level) <= 1e-12 * (1 + std::abs(s.level)));
  CHECK(leg.time() > 0.0);
  ReturnMap never(cfg, Section{0, 1e3, CrossingDirection::Up}, 1.0 / 64.0, 20.0);
  CHECK_THROWS_AS(never.next(tr.states.back()), NoCycle);
}

TEST_CASE("orbit just past the first Hopf for n = 4") {
  const SystemConfig cfg{4, 1.05, 0.0};
  const Trajectory tr = settle(cfg, cold_start(cfg), 2000, 50);
  const PeriodicOrbit o = find_periodic_orbit(cfg, tr.states.back(), mean_section(tr));
  CHECK(o.period == doctest::Approx(2 * kPi).epsilon(0.02));
  CHECK(std::abs(o.floquet[o.trivial] - 1.0) <= 1e-3);
  CHECK(o.stable());
  CHECK(o.wave_number == 1);
  CHECK(o.returns == 1);
}

TEST_CASE("stable orbit for n = 5 at F = 3.5") {
  const SystemConfig cfg{5, 3.5, 0.0};
  const Trajectory tr = settle(cfg, cold_start(cfg), 1000, 50);
  const PeriodicOrbit o = find_periodic_orbit(cfg, tr.states.back(), mean_section(tr));
  CHECK(std::abs(o.floquet[o.trivial] - 1.0) <= 1e-3);
  for (const auto& mu : o.nontrivial()) CHECK(std::abs(mu) < 1.0);
  CHECK(product_modulus(o) == doctest::Approx(std::exp(-5.0 * o.period)).epsilon(0.01));

  // The orbit closes: one flight of T brings the anchor back.
  ReturnMap map(cfg, mean_section(tr), CycleOptions{}.dt, 100.0);
  CHECK((map.next(o.anchor) - o.anchor).norm() <= 1e-7);
}

TEST_CASE("multiplier product with diffusion") {
  const SystemConfig cfg{6, 4.0, 0.15};
  const Trajectory tr = settle(cfg, cold_start(cfg), 1000, 50);
  const PeriodicOrbit o = find_periodic_orbit(cfg, tr.states.back(), mean_section(tr));
  CHECK(std::abs(o.floquet[o.trivial] - 1.0) <= 1e-3);
  CHECK(product_modulus(o) == doctest::Approx(std::exp(-6.0 * 1.3 * o.period)).epsilon(0.01));
}

TEST_CASE("doubled orbit needs two returns") {
  const SystemConfig cfg{5, 4.3, 0.0};
  const Trajectory tr = settle(cfg, cold_start(cfg), 2000, 50);
  const Section s = mean_section(tr);
  const PeriodicOrbit o = find_periodic_orbit(cfg, tr.states.back(), s);
  // The mean-level section may be cut more than twice per loop.
  REQUIRE(o.returns >= 2);
  ReturnMap map(cfg, s, CycleOptions{}.dt, 100.0);
  StateVec y = o.anchor;
  for (int k = 1; k < o.returns; ++k) {
    y = map.next(y);
    CHECK((y - o.anchor).norm() > 1e-3);
  }
  CHECK((map.next(y) - o.anchor).norm() <= 1e-7);
  CHECK(std::abs(o.floquet[o.trivial] - 1.0) <= 1e-3);
}

TEST_CASE("no cycle below onset") {
  const SystemConfig cfg{5, 0.5, 0.0};
  CHECK_THROWS_AS(track_cycle_bifurcations(cfg, 0.5, 0.6), NoCycle);
}

TEST_CASE("crossing kinds") {
  CHECK(classify_crossing({1.0001, 0.0}) == CycleBifurcationKind::Fold);
  CHECK(classify_crossing({-1.0001, 0.0}) == CycleBifurcationKind::PeriodDoubling);
  CHECK(classify_crossing(std::polar(1.0001, 1.0)) == CycleBifurcationKind::NeimarkSacker);
  CHECK(to_string(CycleBifurcationKind::NeimarkSacker) == "neimark_sacker");
}

TEST_CASE("bifurcation tracking") {
  SUBCASE("period doubling cascade for n = 5") {
    const Branch b = track_cycle_bifurcations({5, 0.0, 0.0}, 3.5, 5.1);
    REQUIRE(b.events.size() >= 2u);
    CHECK(b.events[0].kind == CycleBifurcationKind::PeriodDoubling);
    CHECK(std::abs(b.events[0].F - 3.9379) <= 0.005);
    CHECK(b.events[1].kind == CycleBifurcationKind::PeriodDoubling);
    CHECK(std::abs(b.events[1].F - 4.982) <= 0.01);
    CHECK(b.points.back().returns == 4);
    for (const auto& p : b.points) CHECK(std::abs(p.F - 3.5) <= 1.6 + 1e-12);
  }
  SUBCASE("torus birth for n = 6") {
    const Branch b = track_cycle_bifurcations({6, 0.0, 0.0}, 5.3, 5.6);
    REQUIRE_FALSE(b.events.empty());
    CHECK(b.events[0].kind == CycleBifurcationKind::NeimarkSacker);
    CHECK(std::abs(b.events[0].F - 5.4567) <= 0.005);
    CHECK(std::abs(std::abs(std::arg(b.events[0].multiplier)) - 0.0) > 0.1);
    CHECK(std::abs(std::abs(std::arg(b.events[0].multiplier)) - kPi) > 0.1);
  }
}
