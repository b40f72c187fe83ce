#include "cycleforge/canonical.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace cycleforge {

namespace {

constexpr std::array<std::array<int, 2>, 6> kDMonomials{{{4, 1}, {2, 1}, {0, 1}, {0, 3}, {6, 1}, {0, 5}}};
constexpr std::array<std::array<int, 2>, 9> kEMonomials{
    {{4, 1}, {2, 1}, {0, 1}, {0, 3}, {6, 1}, {0, 5}, {1, 1}, {3, 1}, {5, 1}}};

double term_scale(const PlanarField& f, double x, double y) {
  double s = 0.0;
  for (const Poly2* p : {&f.f1, &f.f2})
    for (const auto& t : p->terms()) s += std::abs(t.coeff * std::pow(x, t.i) * std::pow(y, t.j));
  return s;
}

}  // namespace

void CanonicalApos::validate() const {
  if (!(a > 0.0) || !(b < 0.0)) throw std::invalid_argument("CanonicalApos: requires a > 0 and b < 0");
  for (double v : d)
    if (!std::isfinite(v)) throw std::invalid_argument("CanonicalApos: non-finite d coefficient");
  if (!std::isfinite(eps)) throw std::invalid_argument("CanonicalApos: non-finite eps");
}

void CanonicalAneg::validate() const {
  if (!(a < 0.0) || !(b > 0.0)) throw std::invalid_argument("CanonicalAneg: requires a < 0 and b > 0");
  for (double v : e)
    if (!std::isfinite(v)) throw std::invalid_argument("CanonicalAneg: non-finite e coefficient");
  if (!std::isfinite(eps)) throw std::invalid_argument("CanonicalAneg: non-finite eps");
}

std::array<int, 2> d_monomial(int k) { return kDMonomials.at(static_cast<std::size_t>(k - 1)); }
std::array<int, 2> e_monomial(int k) { return kEMonomials.at(static_cast<std::size_t>(k - 1)); }

CanonicalApos to_canonical_apos(const OscParams& p) {
  p.validate();
  if (!(p.a > 0.0 && p.b < 0.0)) throw std::invalid_argument("to_canonical_apos: requires a > 0, b < 0");
  constexpr std::array<int, 6> m{5, 3, 1, 1, 7, 1};
  CanonicalApos c;
  c.a = p.a;
  c.b = p.b;
  c.eps = p.eps;
  for (int k = 1; k <= 6; ++k) c.dk(k) = p.ck(k) / std::pow(p.a, m[k - 1] / 2.0);
  return c;
}

CanonicalAneg to_canonical_aneg(const OscParams& p) {
  p.validate();
  if (!(p.a < 0.0 && p.b > 0.0)) throw std::invalid_argument("to_canonical_aneg: requires a < 0, b > 0");
  const double a = p.a, b = p.b;
  const double c1 = p.ck(1), c2 = p.ck(2), c3 = p.ck(3), c4 = p.ck(4), c5 = p.ck(5), c6 = p.ck(6);
  const double r2 = std::sqrt(2.0), ma = -a, sb = std::sqrt(b);
  CanonicalAneg c;
  c.a = a;
  c.b = b;
  c.eps = p.eps;
  c.ek(1) = (2 * c1 * b - 15 * a * c5) / (8 * r2 * std::pow(ma, 2.5) * b);
  c.ek(2) = (15 * a * a * c5 - 12 * a * c1 * b + 4 * c2 * b * b) / (8 * r2 * std::pow(ma, 1.5) * b * b);
  c.ek(3) = -(a * a * a * c5 - 2 * a * a * c1 * b + 4 * a * c2 * b * b - 8 * c3 * b * b * b) /
            (8 * r2 * std::sqrt(ma) * b * b * b);
  c.ek(4) = c4 / std::sqrt(-2 * a);
  c.ek(5) = c5 / (8 * r2 * std::pow(ma, 3.5));
  c.ek(6) = c6 / std::sqrt(-2 * a);
  c.ek(7) = (3 * a * a * c5 - 4 * a * c1 * b + 4 * c2 * b * b) / (4 * r2 * std::sqrt(ma) * std::pow(b, 2.5));
  c.ek(8) = -(5 * a * c5 - 2 * c1 * b) / (2 * r2 * std::pow(ma, 1.5) * std::pow(b, 1.5));
  c.ek(9) = 3 * c5 / (4 * r2 * std::pow(ma, 2.5) * sb);
  return c;
}

Poly2 perturbation(const CanonicalApos& c) {
  Poly2 q;
  for (int k = 1; k <= 6; ++k) {
    const auto [i, j] = d_monomial(k);
    q.add(i, j, c.dk(k));
  }
  return q;
}

Poly2 perturbation(const CanonicalAneg& c) {
  Poly2 q;
  for (int k = 1; k <= 9; ++k) {
    const auto [i, j] = e_monomial(k);
    q.add(i, j, c.ek(k));
  }
  return q;
}

PlanarField canonical_field(const CanonicalApos& c) {
  c.validate();
  PlanarField f;
  f.f1.set(0, 1, 1.0);
  f.f2.set(1, 0, -1.0);
  f.f2.set(3, 0, -2.0 * c.b / (c.a * c.a));
  f.f2 = f.f2 + perturbation(c) * c.eps;
  return f;
}

PlanarField canonical_field(const CanonicalAneg& c) {
  c.validate();
  PlanarField f;
  f.f1.set(0, 1, 1.0);
  f.f2.set(1, 0, -1.0);
  f.f2.set(2, 0, 3.0 * std::sqrt(c.b) / (2.0 * c.a));
  f.f2.set(3, 0, -c.b / (2.0 * c.a * c.a));
  f.f2 = f.f2 + perturbation(c) * c.eps;
  return f;
}

double canonical_hamiltonian(const CanonicalApos& c, double x, double y) {
  const double x2 = x * x;
  return 0.5 * x2 + c.b * x2 * x2 / (2.0 * c.a * c.a) + 0.5 * y * y;
}

double canonical_hamiltonian(const CanonicalAneg& c, double x, double y) {
  const double x2 = x * x;
  return 0.5 * x2 - std::sqrt(c.b) / (2.0 * c.a) * x2 * x + c.b / (8.0 * c.a * c.a) * x2 * x2 + 0.5 * y * y;
}

PlanarField pushforward_apos(const OscParams& p) {
  const PlanarField f = build_system(p);
  const double s = std::sqrt(p.a);
  // X = s x, T = s t: dX/dT = xdot, dY/dT = ydot / s.
  return {f.f1.affine(0.0, 1.0 / s, 1.0), f.f2.affine(0.0, 1.0 / s, 1.0) * (1.0 / s)};
}

PlanarField pushforward_aneg(const OscParams& p) {
  const PlanarField f = build_system(p);
  const double w = std::sqrt(-2.0 * p.a);
  const double xp = std::sqrt(-p.a / (2.0 * p.b));
  // X = w (x - xp), T = w t.
  return {f.f1.affine(xp, 1.0 / w, 1.0), f.f2.affine(xp, 1.0 / w, 1.0) * (1.0 / w)};
}

ConjugacyReport verify_conjugacy(const OscParams& p, int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw std::invalid_argument("verify_conjugacy: n_samples must be >= 1");
  p.validate();
  const bool apos = p.a > 0.0;

  PlanarField canon, push;
  double x0 = 0.0, sx = 1.0, tscale = 1.0;
  ConjugacyReport rep;
  rep.n_samples = n_samples;

  // Coefficient-level check of the closed formulas; the y-dependent part of the
  // pushforward at eps = 0.1 is 0.1 * Q.
  OscParams unit = p;
  unit.eps = 0.1;
  auto check = [&rep](const std::string& name, double closed, double derived, double ref) {
    const double denom = std::max(std::abs(derived), ref);
    const double err = denom > 0.0 ? std::abs(closed - derived) / denom : std::abs(closed - derived);
    rep.coefficient_names.push_back(name);
    rep.coefficient_rel_err.push_back(err);
    if (err > 1e-10) rep.flagged.push_back(name);
  };

  if (apos) {
    const CanonicalApos c = to_canonical_apos(p);
    canon = canonical_field(c);
    push = pushforward_apos(p);
    sx = 1.0 / std::sqrt(p.a);
    tscale = std::sqrt(p.a);
    const Poly2 q = pushforward_apos(unit).f2 * 10.0;
    double ref = 0.0;
    for (int k = 1; k <= 6; ++k) ref = std::max(ref, std::abs(q.coeff(d_monomial(k)[0], d_monomial(k)[1])));
    for (int k = 1; k <= 6; ++k) {
      const auto [i, j] = d_monomial(k);
      check("d" + std::to_string(k), c.dk(k), q.coeff(i, j), 1e-12 * ref);
    }
  } else {
    const CanonicalAneg c = to_canonical_aneg(p);
    canon = canonical_field(c);
    push = pushforward_aneg(p);
    x0 = std::sqrt(-p.a / (2.0 * p.b));
    sx = 1.0 / std::sqrt(-2.0 * p.a);
    tscale = std::sqrt(-2.0 * p.a);
    const Poly2 q = pushforward_aneg(unit).f2 * 10.0;
    double ref = 0.0;
    for (int k = 1; k <= 9; ++k) ref = std::max(ref, std::abs(q.coeff(e_monomial(k)[0], e_monomial(k)[1])));
    for (int k = 1; k <= 9; ++k) {
      const auto [i, j] = e_monomial(k);
      check("e" + std::to_string(k), c.ek(k), q.coeff(i, j), 1e-12 * ref);
    }
  }

  const PlanarField orig = build_system(p);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int n = 0; n < n_samples; ++n) {
    const double r = std::sqrt(u01(rng)), th = 2.0 * M_PI * u01(rng);
    const double X = r * std::cos(th), Y = r * std::sin(th);
    // Original coordinates of the canonical sample point.
    const double x = x0 + sx * X, y = Y;
    const auto F = orig(x, y);
    const double g1 = F[0], g2 = F[1] / tscale;  // dX/dT = xdot, dY/dT = ydot / tscale
    const auto G = canon(X, Y);
    const double scale = std::max(term_scale(canon, X, Y), 1e-300);
    const double res = std::hypot(G[0] - g1, G[1] - g2) / scale;
    rep.max_residual = std::max(rep.max_residual, res);
    // The polynomial pushforward must agree as well.
    const auto P = push(X, Y);
    rep.max_residual = std::max(rep.max_residual, std::hypot(P[0] - g1, P[1] - g2) / scale);
  }
  return rep;
}

}  // namespace cycleforge
