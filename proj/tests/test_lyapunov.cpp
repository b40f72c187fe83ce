#include <doctest.h>

#include <cmath>
#include <random>

#include "cycleforge/lyapunov.hpp"
#include "cycleforge/verify.hpp"

using namespace cycleforge;

namespace {

CanonicalApos apos_base() { return CanonicalApos{1.3, -0.7, {0.4, 0.5, 0.0, 0.8, 0.2, 0.3}, 0.01}; }
CanonicalAneg aneg_base() { return CanonicalAneg{-1.2, 0.8, {0.3, -0.2, 0.0, 0.5, 0.7, -0.4, 0.6, 0.1, -0.9}, 0.01}; }

}  // namespace

TEST_CASE("apos first focal value") {
  CanonicalApos c{1.0, -1.0, {}, 0.01};
  c.dk(2) = 1.0;
  c.dk(4) = 1.0;
  CHECK(closed_v_apos(c).v(3) == doctest::Approx(-0.01 * M_PI).epsilon(1e-14));
  c.dk(2) = -3.0;
  CHECK(std::abs(closed_v_apos(c).v(3)) < 1e-18);
  CHECK(closed_v_apos(c).first_nonzero() == 5);
}

TEST_CASE("apos center chain makes every focal value vanish") {
  const CanonicalApos c = impose_chain_apos(apos_base(), 5);
  const LyapunovSpectrum sp = closed_v_apos(c);
  for (int k = 3; k <= 11; k += 2) CHECK(std::abs(sp.v(k)) < 1e-15);
  CHECK(sp.first_nonzero() == 0);
}

TEST_CASE("chain stages leave exactly the next focal value") {
  for (int stage = 0; stage <= 4; ++stage) {
    const LyapunovSpectrum sp = closed_v_apos(impose_chain_apos(apos_base(), stage));
    CHECK(sp.first_nonzero() == 2 * stage + 3);
    const LyapunovSpectrum sn = closed_v_aneg(impose_chain_aneg(aneg_base(), stage));
    CHECK(sn.first_nonzero() == 2 * stage + 3);
  }
}

TEST_CASE("aneg first focal value") {
  CanonicalAneg c{-1.0, 1.0, {}, 0.01};
  c.ek(7) = 1.0;
  CHECK(closed_v_aneg(c).v(3) == doctest::Approx(3.0 * M_PI * 0.01 / 8.0).epsilon(1e-14));
  CanonicalAneg d = aneg_base();
  d.ek(2) = -3.0 * (2.0 * d.a * d.ek(4) + std::sqrt(d.b) * d.ek(7)) / (2.0 * d.a);
  CHECK(std::abs(closed_v_aneg(d).v(3)) < 1e-16);
}

TEST_CASE("closed forms reject a trace term and eps = 0") {
  CanonicalApos c = apos_base();
  c.dk(3) = 0.1;
  CHECK_THROWS_AS(closed_v_apos(c), std::invalid_argument);
  CanonicalApos z = apos_base();
  z.eps = 0.0;
  CHECK_THROWS_AS(closed_v_apos(z), std::invalid_argument);
  CHECK_THROWS_AS(impose_chain_aneg(aneg_base(), 5), std::invalid_argument);
}

TEST_CASE("return series of a center") {
  CanonicalApos c = apos_base();
  c.eps = 0.0;
  const ReturnSeries rs = numeric_series(canonical_field(c), 11);
  CHECK(rs.coeff(1) == doctest::Approx(1.0).epsilon(1e-14));
  for (int i = 2; i <= 11; ++i) CHECK(std::abs(rs.coeff(i)) < 1e-10);
}

TEST_CASE("return series reproduces the closed focal values") {
  for (int stage = 0; stage <= 4; ++stage) {
    const CanonicalApos c = impose_chain_apos(apos_base(), stage);
    const int k = 2 * stage + 3;
    const ReturnSeries rs = numeric_series(canonical_field(c), k, {512, 1e-12, SeriesPrecision::Quad});
    CHECK(rs.coeff(k) == doctest::Approx(closed_v_apos(c).v(k)).epsilon(1e-6));
    const CanonicalAneg e = impose_chain_aneg(aneg_base(), stage);
    const ReturnSeries re = numeric_series(canonical_field(e), k, {512, 1e-12, SeriesPrecision::Quad});
    CHECK(re.coeff(k) == doctest::Approx(closed_v_aneg(e).v(k)).epsilon(1e-6));
  }
}

TEST_CASE("even return coefficients vanish for random parameters") {
  std::mt19937_64 g(17);
  for (int t = 0; t < 4; ++t) {
    CanonicalApos c = random_apos(g());
    const ReturnSeries rs = numeric_series(canonical_field(c), 4);
    CHECK(std::abs(rs.coeff(2)) < 1e-10);
    CHECK(std::abs(rs.coeff(4)) < 1e-10);
  }
}

TEST_CASE("extended and quad precision agree on a moderate coefficient") {
  const CanonicalApos c = impose_chain_apos(apos_base(), 2);
  const ReturnSeries lo = numeric_series(canonical_field(c), 7);
  const ReturnSeries hi = numeric_series(canonical_field(c), 7, {512, 1e-12, SeriesPrecision::Quad});
  CHECK(lo.coeff(7) == doctest::Approx(hi.coeff(7)).epsilon(1e-9));
}

TEST_CASE("series input validation") {
  const PlanarField f = canonical_field(apos_base());
  CHECK_THROWS_AS(numeric_series(f, 13), std::invalid_argument);
  CHECK_THROWS_AS(numeric_series(f, 3, {4, 1e-12, SeriesPrecision::Extended}), std::invalid_argument);
  PlanarField g = f;
  g.f2.set(1, 0, -2.0);
  CHECK_THROWS_AS(numeric_series(g, 3), std::invalid_argument);
}

TEST_CASE("aneg V11 sign surrogate agrees with the series") {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const CanonicalAneg c = impose_chain_aneg(random_aneg(draw_seed(21, 3, s)), 4);
    const LyapunovSpectrum sp = closed_v_aneg(c);
    const ReturnSeries rs = numeric_series(canonical_field(c), 11, {512, 1e-12, SeriesPrecision::Quad});
    CHECK((*sp.v11_sign_surrogate > 0) == (rs.coeff(11) > 0));
  }
}

TEST_CASE("forward displacement at eps = 0 vanishes") {
  CanonicalApos c = apos_base();
  c.eps = 0.0;
  const DisplacementFit fit = displacement_fit(canonical_field(c), default_fit_radii());
  for (double d : fit.displacement) CHECK(std::abs(d) < 1e-9);
}

// theta-increasing integration is the backward-time return map, so forward displacement is -V r^k.
TEST_CASE("forward displacement leads with minus the first focal value") {
  CanonicalApos c{1.0, -1.0, {}, 0.01};
  c.dk(2) = 1.0;
  const double v3 = closed_v_apos(c).v(3);
  const DisplacementFit fit = displacement_fit(canonical_field(c), default_fit_radii());
  CHECK(fit.coefficients[0] / v3 == doctest::Approx(-1.0).epsilon(0.05));
  CHECK((fit.displacement.front() > 0) == (v3 < 0));

  const std::vector<double> radii = default_fit_radii();
  REQUIRE(radii.size() == 8);
  CHECK(radii.front() == doctest::Approx(0.02));
  CHECK(radii.back() == doctest::Approx(0.02 * std::pow(1.3, 7)));
}

TEST_CASE("displacement fit input validation") {
  const PlanarField f = canonical_field(apos_base());
  CHECK_THROWS_AS(displacement_fit(f, {0.01, 0.02, 0.03}), std::invalid_argument);
  CHECK_THROWS_AS(displacement_fit(f, {0.01, 0.02, 0.03, 0.04, 0.05, 0.3}), std::invalid_argument);
  CHECK_THROWS_AS(displacement_fit(f, {0.02, 0.01, 0.03, 0.04, 0.05, 0.06}), std::invalid_argument);
}
