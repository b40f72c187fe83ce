#include <doctest.h>

#include <cmath>

#include "cycleforge/bautin.hpp"
#include "cycleforge/simulate.hpp"
#include "cycleforge/verify.hpp"

using namespace cycleforge;

namespace {

CanonicalApos center() { return CanonicalApos{1.0, -1.0, {}, 0.0}; }

IntegratorConfig boxed() {
  IntegratorConfig cfg;
  cfg.escape_box = search_setup(Regime::Apos, 1.0, -1.0).escape_box;
  return cfg;
}

}  // namespace

TEST_CASE("energy is conserved over 100 revolutions") {
  const CanonicalApos c = center();
  const PlanarField f = canonical_field(c);
  const double x0 = 0.5;
  const ReturnResult rr = poincare_return(f, x0, boxed());
  const Trajectory tr = integrate(f, {x0, 0.0}, 100.0 * rr.period, boxed());
  const double h0 = canonical_hamiltonian(c, x0, 0.0);
  double drift = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    drift = std::max(drift, std::abs(canonical_hamiltonian(c, tr.x[i], tr.y[i]) - h0));
  CHECK(drift < 1e-10);
}

TEST_CASE("small orbits rotate with period 2 pi") {
  const ReturnResult rr = poincare_return(canonical_field(center()), 1e-4, boxed());
  CHECK(rr.period == doctest::Approx(2.0 * M_PI).epsilon(1e-6));
  CHECK(std::abs(rr.displacement) < 1e-10);
  CHECK(rr.h == doctest::Approx(1e-4).epsilon(1e-10));
}

TEST_CASE("orbits are odd-symmetric") {
  const PlanarField f = canonical_field(CanonicalApos{1.0, -1.0, {0.2, -0.3, 0.0, 0.5, 0.1, 0.4}, 0.05});
  IntegratorConfig cfg = boxed();
  cfg.order = 5;
  const Trajectory a = integrate(f, {0.3, 0.1}, 7.0, cfg, 0.5);
  const Trajectory b = integrate(f, {-0.3, -0.1}, 7.0, cfg, 0.5);
  REQUIRE(a.t.size() == b.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i) {
    CHECK(a.x[i] == doctest::Approx(-b.x[i]).epsilon(1e-12));
    CHECK(a.y[i] == doctest::Approx(-b.y[i]).epsilon(1e-12));
  }
}

TEST_CASE("center has no cycles") {
  const SearchSetup s = search_setup(Regime::Apos, 1.0, -1.0);
  CycleSearchOptions so;
  so.loop_crossing = s.loop_crossing;
  const LimitCycleReport rep = find_cycles(canonical_field(center()), s.interval, 32, boxed(), so);
  CHECK(rep.cycles.empty());
  for (const auto& [x, d] : rep.displacement_samples) CHECK(std::abs(d) < 1e-9);
}

TEST_CASE("displacement sign follows the forward flow near a weak focus") {
  CanonicalApos c{1.0, -1.0, {}, 0.01};
  c.dk(4) = 1.0;  // y^3 damping term: V3 < 0, energy pumped in
  const ReturnResult rr = poincare_return(canonical_field(c), 0.05, boxed());
  CHECK(closed_v_apos(c).v(3) < 0.0);
  CHECK(rr.displacement > 0.0);
}

TEST_CASE("serial and parallel scans agree bitwise") {
  const RealizedSchedule r = realize(schedule_small_apos(2, 1.0, -1.0), 0.05);
  const PlanarField f = canonical_field(r.apos());
  const std::vector<double> xs = geometric_ladder(1e-3, 0.7, 24);
  const auto serial = scan_returns(f, xs, boxed(), false);
  const auto parallel = scan_returns(f, xs, boxed(), true);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(serial[i].displacement == parallel[i].displacement);
    CHECK(serial[i].period == parallel[i].period);
  }
}

TEST_CASE("two-cycle schedule yields alternating hyperbolic cycles") {
  const RealizedSchedule r = realize(schedule_small_apos(2, 1.0, -1.0), 0.05);
  const SearchSetup s = search_setup(Regime::Apos, 1.0, -1.0);
  CycleSearchOptions so;
  so.loop_crossing = s.loop_crossing;
  const LimitCycleReport rep = find_cycles(canonical_field(r.apos()), s.interval, 64, boxed(), so);
  REQUIRE(rep.cycles.size() == 2);
  CHECK(rep.cycles[0].stability != rep.cycles[1].stability);
  CHECK(rep.cycles[0].stability == *r.innermost_forward);
  for (const auto& cy : rep.cycles) {
    CHECK(cy.hyperbolic);
    CHECK(cy.amplitude_class == AmplitudeClass::Small);
    CHECK(cy.bracket_hi - cy.bracket_lo <= 1e-8);
    CHECK(cy.bracket_lo <= cy.section_x);
    CHECK(cy.section_x <= cy.bracket_hi);
  }
}

TEST_CASE("escaping orbits are reported") {
  const PlanarField f = canonical_field(center());
  CHECK_THROWS_AS(poincare_return(f, 0.9, boxed()), EscapeError);
  const auto rr = scan_returns(f, {0.3, 0.9}, boxed(), false);
  CHECK(std::isfinite(rr[0].displacement));
  CHECK(std::isnan(rr[1].displacement));
}

TEST_CASE("integrator configuration validation") {
  IntegratorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rel_tol = 1e-16;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.order = 6;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("geometric ladder") {
  const auto xs = geometric_ladder(1e-3, 1.0, 4);
  REQUIRE(xs.size() == 4);
  CHECK(xs[0] == doctest::Approx(1e-3));
  CHECK(xs[1] == doctest::Approx(1e-2));
  CHECK(xs[3] == doctest::Approx(1.0));
}

TEST_CASE("loop-breaking layer yields a large cycle near the loop") {
  const RealizedSchedule r = realize(schedule_mixed_apos(0, 3, 1.0, -1.0), 0.01);
  const SearchSetup s = search_setup(Regime::Apos, 1.0, -1.0);
  CycleSearchOptions so;
  so.loop_crossing = s.loop_crossing;
  const LimitCycleReport rep = find_cycles(canonical_field(r.apos()), s.interval, 64, boxed(), so);
  REQUIRE(rep.cycles.size() == 1);
  CHECK(rep.cycles[0].amplitude_class == AmplitudeClass::Large);
  CHECK(rep.cycles[0].section_x > 0.9 * s.loop_crossing);
}

TEST_CASE("single stability layer on a zero base leaves no resolvable cycle") {
  const RealizedSchedule r = realize(schedule_mixed_apos(0, 1, 1.0, -1.0), 0.01);
  const SearchSetup s = search_setup(Regime::Apos, 1.0, -1.0);
  CycleSearchOptions so;
  so.loop_crossing = s.loop_crossing;
  CHECK(find_cycles(canonical_field(r.apos()), s.interval, 64, boxed(), so).cycles.empty());
}
