#include <doctest.h>

#include <cmath>
#include <random>

#include "cycleforge/canonical.hpp"

using namespace cycleforge;

TEST_CASE("apos scaling is the identity for a = 1") {
  const OscParams p{1.0, -0.8, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6}, 0.01};
  const CanonicalApos c = to_canonical_apos(p);
  for (int k = 1; k <= 6; ++k) CHECK(c.dk(k) == doctest::Approx(p.ck(k)));
  CHECK(c.a == 1.0);
  CHECK(c.b == -0.8);
}

TEST_CASE("apos scaling exponents") {
  OscParams p{4.0, -1.0, {}, 0.01};
  p.ck(3) = 1.0;
  CHECK(to_canonical_apos(p).dk(3) == doctest::Approx(0.5));
  p.ck(3) = 0.0;
  p.ck(1) = 1.0;
  CHECK(to_canonical_apos(p).dk(1) == doctest::Approx(1.0 / 32.0));
}

TEST_CASE("aneg closed formulas") {
  OscParams p{-0.5, 1.0, {}, 0.01};
  p.ck(4) = 1.0;
  CHECK(to_canonical_aneg(p).ek(4) == doctest::Approx(1.0));

  const CanonicalAneg zero = to_canonical_aneg(OscParams{-1.0, 1.0, {}, 0.01});
  for (int k = 1; k <= 9; ++k) CHECK(zero.ek(k) == 0.0);

  OscParams q{-1.0, 1.0, {}, 0.01};
  q.ck(5) = 1.0;
  CHECK(to_canonical_aneg(q).ek(5) == doctest::Approx(1.0 / (8.0 * std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("wrong sign pattern is rejected") {
  CHECK_THROWS_AS(to_canonical_apos(OscParams{-1.0, 1.0, {}, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(to_canonical_aneg(OscParams{1.0, -1.0, {}, 0.0}), std::invalid_argument);
}

TEST_CASE("canonical fields have unit rotation linear part") {
  CanonicalApos c{1.3, -0.7, {0.1, 0.2, 0.0, 0.3, 0.4, 0.5}, 0.02};
  CHECK(canonical_field(c).has_unit_rotation_linear_part());
  CanonicalAneg e{-1.3, 0.7, {0.1, 0.2, 0.0, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8}, 0.02};
  CHECK(canonical_field(e).has_unit_rotation_linear_part());
}

TEST_CASE("monomial layout of canonical coefficients") {
  CHECK(d_monomial(1) == std::array<int, 2>{4, 1});
  CHECK(d_monomial(6) == std::array<int, 2>{0, 5});
  CHECK(e_monomial(7) == std::array<int, 2>{1, 1});
  CHECK(e_monomial(9) == std::array<int, 2>{5, 1});
}

TEST_CASE("canonical hamiltonians are first integrals at eps = 0") {
  const CanonicalApos c{1.2, -0.9, {}, 0.0};
  const CanonicalAneg e{-1.2, 0.9, {}, 0.0};
  const PlanarField fc = canonical_field(c), fe = canonical_field(e);
  const double h = 1e-6;
  for (double x : {-0.3, 0.1, 0.4})
    for (double y : {-0.2, 0.25}) {
      const auto vc = fc(x, y);
      const double dxc = (canonical_hamiltonian(c, x + h, y) - canonical_hamiltonian(c, x - h, y)) / (2 * h);
      const double dyc = (canonical_hamiltonian(c, x, y + h) - canonical_hamiltonian(c, x, y - h)) / (2 * h);
      CHECK(dxc * vc[0] + dyc * vc[1] == doctest::Approx(0.0).epsilon(1e-8).scale(1.0));
      const auto ve = fe(x, y);
      const double dxe = (canonical_hamiltonian(e, x + h, y) - canonical_hamiltonian(e, x - h, y)) / (2 * h);
      const double dye = (canonical_hamiltonian(e, x, y + h) - canonical_hamiltonian(e, x, y - h)) / (2 * h);
      CHECK(std::abs(dxe * ve[0] + dye * ve[1]) < 1e-8);
    }
  // Saddle level of the apos loop.
  CHECK(canonical_hamiltonian(c, c.a / std::sqrt(-2 * c.b), 0.0) == doctest::Approx(-c.a * c.a / (8 * c.b)));
}

TEST_CASE("conjugacy oracle") {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto coeffs = [&] {
    std::array<double, 6> c{};
    for (auto& v : c) v = u(g);
    return c;
  };
  const ConjugacyReport id = verify_conjugacy(OscParams{1.0, -1.0, coeffs(), 0.05}, 100, 3);
  CHECK(id.max_residual < 1e-12);
  CHECK(id.flagged.empty());
  const ConjugacyReport r4 = verify_conjugacy(OscParams{4.0, -1.0, coeffs(), 0.05}, 100, 3);
  CHECK(r4.max_residual < 1e-10);
  CHECK(r4.flagged.empty());
  const ConjugacyReport rn = verify_conjugacy(OscParams{-1.0, 1.0, coeffs(), 0.05}, 100, 3);
  CHECK(rn.max_residual < 1e-10);
  CHECK(rn.flagged.empty());
  CHECK(rn.coefficient_names.size() == 9);
  CHECK(rn.n_samples == 100);
}

TEST_CASE("pushforward matches the closed canonical coefficients") {
  const OscParams p{2.5, -0.4, {0.3, -0.1, 0.2, 0.5, -0.7, 0.9}, 0.03};
  const PlanarField push = pushforward_apos(p);
  const PlanarField canon = canonical_field(to_canonical_apos(p));
  for (const auto& t : canon.f2.terms()) CHECK(push.f2.coeff(t.i, t.j) == doctest::Approx(t.coeff).epsilon(1e-12));
}
