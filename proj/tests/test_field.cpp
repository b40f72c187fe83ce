#include <doctest.h>

#include <cmath>
#include <random>

#include "cycleforge/field.hpp"

using namespace cycleforge;

TEST_CASE("unperturbed physical field is -a x - 2 b x^3") {
  OscParams p{1.0, -1.0, {}, 0.0};
  const PlanarField f = build_system(p);
  CHECK(f.f1.coeff(0, 1) == 1.0);
  CHECK(f.f2.coeff(1, 0) == -1.0);
  CHECK(f.f2.coeff(3, 0) == 2.0);
  CHECK(f.f2.terms().size() == 2);
  const auto v = f(0.0, 0.0);
  CHECK(v[0] == 0.0);
  CHECK(v[1] == 0.0);
}

TEST_CASE("perturbation adds eps * c3 * y") {
  OscParams p{1.0, -1.0, {}, 0.01};
  p.ck(3) = 1.0;
  const PlanarField f = build_system(p);
  CHECK(f.f2.coeff(0, 1) == doctest::Approx(0.01));
  CHECK(f.f2.coeff(1, 0) == -1.0);
  CHECK(f.f2.coeff(3, 0) == 2.0);
}

TEST_CASE("perturbation monomials follow the coefficient layout") {
  OscParams p{2.0, -3.0, {1, 2, 3, 4, 5, 6}, 0.1};
  const PlanarField f = build_system(p);
  CHECK(f.f2.coeff(4, 1) == doctest::Approx(0.1));  // c1 x^4 y
  CHECK(f.f2.coeff(2, 1) == doctest::Approx(0.2));  // c2 x^2 y
  CHECK(f.f2.coeff(0, 1) == doctest::Approx(0.3));  // c3 y
  CHECK(f.f2.coeff(0, 3) == doctest::Approx(0.4));  // c4 y^3
  CHECK(f.f2.coeff(6, 1) == doctest::Approx(0.5));  // c5 x^6 y
  CHECK(f.f2.coeff(0, 5) == doctest::Approx(0.6));  // c6 y^5
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(OscParams({1.0, 1.0, {}, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(OscParams({0.0, -1.0, {}, 0.0}).validate(), std::invalid_argument);
  CHECK_THROWS_AS(OscParams({1.0, -1.0, {}, 0.2}).validate(), std::invalid_argument);
  CHECK_NOTHROW(OscParams({1.0, -1.0, {}, 0.1}).validate());
  CHECK_THROWS_AS(build_system(OscParams{1.0, 2.0, {}, 0.0}), std::invalid_argument);
}

TEST_CASE("equilibria of both sign patterns") {
  const auto apos = equilibria(OscParams{1.0, -1.0, {}, 0.0});
  REQUIRE(apos.size() == 3);
  CHECK(apos[0].kind == EquilibriumKind::Center);
  CHECK(apos[1].position[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(apos[1].kind == EquilibriumKind::Saddle);
  CHECK(apos[2].position[0] == doctest::Approx(-apos[1].position[0]));
  CHECK(apos[2].position[1] == doctest::Approx(-apos[1].position[1]));

  const auto aneg = equilibria(OscParams{-1.0, 1.0, {}, 0.0});
  REQUIRE(aneg.size() == 3);
  CHECK(aneg[0].kind == EquilibriumKind::Saddle);
  CHECK(aneg[1].position[0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(aneg[1].kind == EquilibriumKind::Center);
  CHECK(aneg[2].kind == EquilibriumKind::Center);
}

TEST_CASE("hamiltonian values and gradient structure") {
  const OscParams p{1.0, -1.0, {}, 0.0};
  CHECK(hamiltonian(p, 0.0, 0.0) == 0.0);
  CHECK(hamiltonian(p, std::sqrt(0.5), 0.0) == doctest::Approx(0.125).epsilon(1e-14));

  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const OscParams q{1.7, -0.6, {}, 0.0};
  const PlanarField f = build_system(q);
  const double h = 1e-5;
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double x = u(g), y = u(g);
    // Central differences are exact for the quartic H up to round-off and an O(h^2 x) term.
    const double hy = (hamiltonian(q, x, y + h) - hamiltonian(q, x, y - h)) / (2 * h);
    const double hx = (hamiltonian(q, x + h, y) - hamiltonian(q, x - h, y)) / (2 * h);
    const auto v = f(x, y);
    worst = std::max(worst, std::abs(hy - v[0]) / std::max(1.0, std::abs(v[0])));
    worst = std::max(worst, std::abs(-hx - v[1]) / std::max(1.0, std::abs(v[1])));
  }
  CHECK(worst < 1e-9);
  CHECK_THROWS_AS(hamiltonian(OscParams{1.0, -1.0, {}, 0.01}, 0.1, 0.1), std::invalid_argument);
}

TEST_CASE("divergence") {
  const OscParams p{1.0, -1.0, {}, 0.0};
  CHECK(divergence_at(build_system(p), {0.3, -0.2}) == 0.0);

  OscParams q{1.0, -1.0, {}, 0.05};
  q.ck(3) = 2.0;
  CHECK(divergence_at(build_system(q), {0.0, 0.0}) == doctest::Approx(0.1));

  OscParams r{1.0, -1.0, {0.3, -0.4, 0.0, 0.7, 0.2, -0.5}, 0.05};
  const PlanarField f = build_system(q), g = build_system(r);
  const PlanarField s = f + g;
  const std::array<double, 2> pt{0.4, 0.3};
  CHECK(divergence_at(s, pt) == doctest::Approx(divergence_at(f, pt) + divergence_at(g, pt)).epsilon(1e-14));
}

TEST_CASE("classification of perturbed focus") {
  OscParams p{1.0, -1.0, {}, 0.01};
  p.ck(3) = 1.0;
  CHECK(classify(build_system(p), {0.0, 0.0}).kind == EquilibriumKind::Focus);
  const OscParams c{1.0, -1.0, {}, 0.0};
  CHECK(classify(build_system(c), {0.0, 0.0}).kind == EquilibriumKind::Center);
}

TEST_CASE("Poly2 algebra") {
  Poly2 p = Poly2::monomial(2, 1, 3.0);
  p.add(0, 0, 1.0);
  CHECK(p(2.0, 5.0) == doctest::Approx(61.0));
  CHECK(p.dx().coeff(1, 1) == 6.0);
  CHECK(p.dy().coeff(2, 0) == 3.0);
  CHECK(p.degree() == 3);
  const Poly2 q = p.affine(1.0, 2.0, 3.0);  // x -> 1 + 2x, y -> 3y
  CHECK(q(0.5, 0.25) == doctest::Approx(p(2.0, 0.75)));
  CHECK_THROWS_AS(p.set(kMaxDegree, 1, 1.0), std::out_of_range);
  CHECK(p.homogeneous(3, 2.0, 5.0) == doctest::Approx(60.0));
}
