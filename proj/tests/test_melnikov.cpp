#include <doctest.h>

#include <cmath>
#include <random>

#include "cycleforge/melnikov.hpp"
#include "cycleforge/verify.hpp"

using namespace cycleforge;

TEST_CASE("apos heteroclinic loop geometry") {
  const LoopGeometry g = loop_apos(1.0, -1.0);
  CHECK(g.kind == LoopKind::Heteroclinic);
  CHECK(loop_y_apos(1.0, -1.0, 0.0) == doctest::Approx(0.5));
  CHECK(std::abs(loop_y_apos(1.0, -1.0, std::sqrt(0.5))) < 1e-12);
  CHECK(g.level == doctest::Approx(0.125));
  CHECK(g.max_residual < 1e-12);
  CHECK(g.extent == doctest::Approx(std::sqrt(0.5)));
  REQUIRE(g.arcs.size() == 2);
  CHECK(g.arcs[0].x.size() >= 1000);
  REQUIRE(g.saddles.size() == 2);
  CHECK(g.saddles[0].kind == EquilibriumKind::Saddle);
}

TEST_CASE("aneg homoclinic loop geometry") {
  const LoopGeometry g = loop_aneg(-1.0, 1.0);
  CHECK(g.kind == LoopKind::Homoclinic);
  REQUIRE(g.saddles.size() == 1);
  CHECK(g.saddles[0].position[0] == doctest::Approx(-1.0));
  CHECK(g.level == doctest::Approx(0.125));
  CHECK(loop_y_aneg(-1.0, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK(g.max_residual < 1e-12);
  CHECK(g.arcs.size() == 4);
}

TEST_CASE("M1 trace-only value and orientation") {
  const LoopGeometry g = loop_apos(1.0, -1.0);
  CanonicalApos c{1.0, -1.0, {}, 0.01};
  CHECK(m1_closed(c) == 0.0);
  CHECK(std::abs(m1_quadrature(c, g).quadrature) < 1e-14);
  c.dk(3) = 1.0;
  const MelnikovResult r = m1_quadrature(c, g);
  CHECK(r.quadrature == doctest::Approx(0.47140452079103).epsilon(1e-12));
  CHECK(std::abs(r.closed_form) == doctest::Approx(9240.0 / (13860.0 * std::sqrt(2.0))).epsilon(1e-12));
  CHECK(r.orientation_sign == kM1OrientationSign);
  CHECK(r.closed_form == doctest::Approx(kM1OrientationSign * r.quadrature).epsilon(1e-12));
}

TEST_CASE("M1 linearity and the zeroing surface") {
  std::mt19937_64 rng(4);
  const CanonicalApos c = random_apos(rng()), d = [&] {
    CanonicalApos t = random_apos(rng());
    t.a = c.a;
    t.b = c.b;
    return t;
  }();
  const LoopGeometry g = loop_apos(c.a, c.b);
  CanonicalApos sum = c;
  for (int k = 1; k <= 6; ++k) sum.dk(k) += d.dk(k);
  CHECK(m1_quadrature(sum, g).quadrature ==
        doctest::Approx(m1_quadrature(c, g).quadrature + m1_quadrature(d, g).quadrature).epsilon(1e-12));

  CanonicalApos z = c;
  z.dk(2) = phi1(z);
  CHECK(std::abs(m1_closed(z)) < 1e-12);
  CHECK(std::abs(m1_quadrature(z, g).quadrature) < 1e-12);

  CanonicalApos s = c;
  s.dk(1) = phi2(s);
  CHECK(std::abs(div_p2(s)) < 1e-12);
}

TEST_CASE("saddle divergence matches the field") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 5; ++t) {
    CanonicalApos c = random_apos(rng());
    c.dk(2) = phi1(c);
    const double X = c.a / std::sqrt(-2.0 * c.b);
    CHECK(div_p2(c) == doctest::Approx(divergence_at(canonical_field(c), {X, 0.0})).epsilon(1e-12));
    CanonicalAneg e = random_aneg(rng());
    e.ek(2) = phi1_aneg(e);
    CHECK(div_q1(e) == doctest::Approx(divergence_at(canonical_field(e), {e.a / std::sqrt(e.b), 0.0})).epsilon(1e-12));
  }
}

TEST_CASE("M2 against quadrature and its zero") {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    const CanonicalAneg c = random_aneg(rng());
    const MelnikovResult r = m2_quadrature(c, loop_aneg(c.a, c.b));
    CHECK(r.closed_form == doctest::Approx(kM2OrientationSign * r.quadrature).epsilon(1e-6));
    CanonicalAneg z = c;
    z.ek(2) = phi1_aneg(z);
    CHECK(std::abs(m2_closed(z)) < 1e-12);
  }
  CHECK(m2_closed(CanonicalAneg{-1.0, 1.0, {}, 0.01}) == 0.0);
}

TEST_CASE("loop stability functional") {
  const LoopGeometry g = loop_apos(1.0, -1.0);
  CanonicalApos zero{1.0, -1.0, {}, 0.01};
  CHECK(loop_stability_integral(zero, g) == 0.0);

  std::mt19937_64 rng(12);
  CanonicalApos c = impose_loop_surface(random_apos(rng()));
  const LoopGeometry gc = loop_apos(c.a, c.b);
  c.dk(5) = phi3(c);
  c = impose_loop_surface(c);
  CHECK(std::abs(loop_stability_integral(c, gc)) < 1e-8);

  // Pure d5 on the surface: the integral has the sign of -a^7 / sqrt(-2 b^7).
  CanonicalApos d{1.0, -1.0, {}, 0.01};
  d.dk(5) = 1.0;
  d = impose_loop_surface(d);
  CHECK(loop_stability_integral(d, g) < 0.0);

  // Off the surface the divergence at the saddles is nonzero and the time integral diverges.
  CanonicalApos off{1.0, -1.0, {}, 0.01};
  off.dk(3) = 1.0;
  CHECK_THROWS_AS(loop_stability_integral(off, g), std::domain_error);
}

TEST_CASE("printed loop functional zeroes the flux integral instead") {
  std::mt19937_64 rng(14);
  CanonicalApos c = random_apos(rng());
  c.dk(5) = phi3_printed(c);
  c = impose_loop_surface(c);
  const LoopGeometry g = loop_apos(c.a, c.b);
  CHECK(std::abs(loop_flux_integral(c, g)) < 1e-8);
  CHECK(std::abs(loop_stability_integral(c, g)) > 1e-3);

  CanonicalAneg e = random_aneg(rng());
  e.ek(5) = phi3_aneg(e);
  e = impose_loop_surface(e);
  CHECK(std::abs(loop_stability_integral(e, loop_aneg(e.a, e.b))) < 1e-8);
}

TEST_CASE("geometry mismatch is rejected") {
  const CanonicalApos c{1.0, -1.0, {}, 0.01};
  CHECK_THROWS_AS(m1_quadrature(c, loop_apos(2.0, -1.0)), std::invalid_argument);
}
