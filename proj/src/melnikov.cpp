#include "cycleforge/melnikov.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

namespace cycleforge {

namespace {

using boost::math::quadrature::gauss_kronrod;
using real = long double;

constexpr double kQuadTol = 1e-13;
constexpr double kRequiredTol = 1e-10;
constexpr unsigned kMaxDepth = 20;

const double kSqrt2 = std::sqrt(2.0);
const double kPi = M_PI;

struct Quad {
  double value = 0.0, error = 0.0, l1 = 0.0;
};

template <class F>
Quad integrate(F f, double lo, double hi, const char* who) {
  Quad q;
  q.value = gauss_kronrod<double, 61>::integrate(f, lo, hi, kMaxDepth, kQuadTol, &q.error, &q.l1);
  if (!std::isfinite(q.value) || q.error > kRequiredTol * std::max(1.0, q.l1))
    throw std::runtime_error(std::string(who) + ": quadrature tolerance not met");
  return q;
}

void check_loop(const LoopGeometry& g, double a, double b, LoopKind kind, const char* who) {
  if (g.kind != kind || g.a != a || g.b != b)
    throw std::invalid_argument(std::string(who) + ": loop geometry does not match the parameters");
}

// Chebyshev-Lobatto nodes on [lo, hi], increasing.
std::vector<double> cheb_nodes(double lo, double hi, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  for (int k = 0; k < n; ++k) x[static_cast<std::size_t>(k)] = mid - half * std::cos(kPi * k / (n - 1));
  x.front() = lo;
  x.back() = hi;
  return x;
}

LoopArc make_arc(std::string name, std::vector<double> xs, double (*yfun)(double, double, double), double a, double b,
                 bool reverse, bool lower) {
  LoopArc arc;
  arc.name = std::move(name);
  if (reverse) std::reverse(xs.begin(), xs.end());
  for (double x : xs) {
    arc.x.push_back(x);
    const double y = yfun(a, b, x);
    arc.y.push_back(lower ? -y : y);
  }
  return arc;
}

template <class H>
void finish(LoopGeometry& g, H ham) {
  for (const auto& arc : g.arcs)
    for (std::size_t k = 0; k < arc.x.size(); ++k) {
      g.max_residual = std::max(g.max_residual, std::abs(ham(arc.x[k], arc.y[k]) - g.level));
      g.extent = std::max(g.extent, std::abs(arc.x[k]));
    }
}

Poly2 dqdy(const CanonicalApos& c) { return perturbation(c).dy(); }
Poly2 dqdy(const CanonicalAneg& c) { return perturbation(c).dy(); }

// Throws when dQ/dy at the saddle is not negligible against the size of its terms.
void require_zero_saddle_divergence(const Poly2& f, double xs, const char* who) {
  double scale = 0.0;
  for (const auto& t : f.terms())
    if (t.j == 0) scale += std::abs(t.coeff * std::pow(xs, t.i));
  const double v = f(xs, 0.0);
  if (std::abs(v) > 1e-9 * std::max(scale, 1e-300) && std::abs(v) > 1e-300)
    throw std::domain_error(std::string(who) + ": dQ/dy is nonzero at the saddle; the time integral diverges");
}

// Upper-branch parametrization of the aneg loops: x = A (u - 1) / sqrt(b), u = +-sqrt(2) sin(phi).
struct AnegParam {
  double A, sb;
  double x(double u) const { return A * (u - 1.0) / sb; }
  double y(double u) const { return A / (2.0 * sb) * std::abs(u) * std::sqrt(std::max(0.0, 2.0 - u * u)); }
};

}  // namespace

std::string to_string(LoopKind k) { return k == LoopKind::Heteroclinic ? "Heteroclinic" : "Homoclinic"; }

double loop_y_apos(double a, double b, double x) {
  const double B = -b;
  const double X2 = a * a / (2.0 * B);
  return std::max(0.0, std::sqrt(B) / a * (X2 - x * x));
}

double loop_y_aneg(double a, double b, double x) {
  const AnegParam p{-a, std::sqrt(b)};
  const double u = p.sb * x / p.A + 1.0;
  return p.y(u);
}

LoopGeometry loop_apos(double a, double b) {
  if (!(a > 0.0) || !(b < 0.0)) throw std::invalid_argument("loop_apos: requires a > 0 and b < 0");
  LoopGeometry g;
  g.kind = LoopKind::Heteroclinic;
  g.a = a;
  g.b = b;
  g.level = -a * a / (8.0 * b);
  const double X = a / std::sqrt(-2.0 * b);
  const auto xs = cheb_nodes(-X, X, kLoopSamples);
  g.arcs.push_back(make_arc("A1", xs, loop_y_apos, a, b, false, false));
  g.arcs.push_back(make_arc("A2", xs, loop_y_apos, a, b, true, true));
  CanonicalApos c;
  c.a = a;
  c.b = b;
  const PlanarField f = canonical_field(c);
  g.saddles = {classify(f, {X, 0.0}), classify(f, {-X, 0.0})};
  finish(g, [&](double x, double y) { return canonical_hamiltonian(c, x, y); });
  return g;
}

LoopGeometry loop_aneg(double a, double b) {
  if (!(a < 0.0) || !(b > 0.0)) throw std::invalid_argument("loop_aneg: requires a < 0 and b > 0");
  LoopGeometry g;
  g.kind = LoopKind::Homoclinic;
  g.a = a;
  g.b = b;
  g.level = a * a / (8.0 * b);
  const double sb = std::sqrt(b);
  const double q1 = a / sb, xr = a * (1.0 - kSqrt2) / sb, xl = a * (1.0 + kSqrt2) / sb;
  const auto right = cheb_nodes(q1, xr, kLoopSamples);
  const auto left = cheb_nodes(xl, q1, kLoopSamples);
  g.arcs.push_back(make_arc("L_r upper", right, loop_y_aneg, a, b, false, false));
  g.arcs.push_back(make_arc("L_r lower", right, loop_y_aneg, a, b, true, true));
  g.arcs.push_back(make_arc("L_l upper", left, loop_y_aneg, a, b, false, false));
  g.arcs.push_back(make_arc("L_l lower", left, loop_y_aneg, a, b, true, true));
  CanonicalAneg c;
  c.a = a;
  c.b = b;
  g.saddles = {classify(canonical_field(c), {q1, 0.0})};
  finish(g, [&](double x, double y) { return canonical_hamiltonian(c, x, y); });
  return g;
}

// ---- apos ----

double m1_closed(const CanonicalApos& c) {
  const double a = c.a, b = c.b;
  const double a2 = a * a, a4 = a2 * a2, a6 = a4 * a2, a8 = a4 * a4, b2 = b * b, b3 = b2 * b;
  return (198 * a6 * b * c.dk(1) - 924 * a4 * b2 * c.dk(2) + 9240 * a2 * b3 * c.dk(3) - 1584 * a4 * b2 * c.dk(4) -
          55 * a8 * c.dk(5) + 320 * a6 * b * c.dk(6)) /
         (13860 * kSqrt2 * b2 * b2);
}

MelnikovResult m1_quadrature(const CanonicalApos& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Heteroclinic, "m1_quadrature");
  const Poly2 q = perturbation(c);
  const double X = c.a / std::sqrt(-2.0 * c.b);
  const Quad r = integrate([&](double x) { return q(x, loop_y_apos(c.a, c.b, x)); }, -X, X, "m1_quadrature");
  return {m1_closed(c), r.value, r.error, kM1OrientationSign};
}

double m1_lower_arc(const CanonicalApos& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Heteroclinic, "m1_lower_arc");
  const Poly2 q = perturbation(c);
  const double X = c.a / std::sqrt(-2.0 * c.b);
  // A2 runs from X to -X with y < 0.
  return -integrate([&](double x) { return q(x, -loop_y_apos(c.a, c.b, x)); }, -X, X, "m1_lower_arc").value;
}

double phi1(const CanonicalApos& c) {
  const double a = c.a, b = c.b, a2 = a * a;
  return -12 * c.dk(4) / 7 - 5 * a2 * a2 * c.dk(5) / (84 * b * b) + a2 * (99 * c.dk(1) + 160 * c.dk(6)) / (462 * b) +
         10 * b * c.dk(3) / a2;
}

double div_p2(const CanonicalApos& c) {
  const double a = c.a, b = c.b, a2 = a * a, a4 = a2 * a2, b2 = b * b;
  return c.eps *
         (-22 * a4 * a2 * c.dk(5) + a4 * b * (33 * c.dk(1) - 40 * c.dk(6)) + 198 * a2 * b2 * c.dk(4) -
          924 * b2 * b * c.dk(3)) /
         (231 * b2 * b);
}

double phi2(const CanonicalApos& c) {
  const double a = c.a, b = c.b, a2 = a * a;
  return 40 * c.dk(6) / 33 + 2 * a2 * c.dk(5) / (3 * b) - 6 * c.dk(4) * b / a2 + 28 * c.dk(3) * b * b / (a2 * a2);
}

double phi3(const CanonicalApos& c) {
  const double a = c.a, b = c.b, a2 = a * a, a4 = a2 * a2;
  return -10 * b * (29 * a4 * c.dk(6) - 924 * b * b * c.dk(3)) / (77 * a4 * a2);
}

double phi3_printed(const CanonicalApos& c) {
  const double a = c.a, b = c.b, a2 = a * a, a4 = a2 * a2;
  return 6 * b * (-100 * a4 * c.dk(6) + 231 * a2 * b * c.dk(4) + 308 * b * b * c.dk(3)) / (11 * a4 * a2);
}

CanonicalApos impose_loop_surface(CanonicalApos c) {
  c.dk(1) = phi2(c);
  c.dk(2) = phi1(c);
  return c;
}

double loop_stability_integral(const CanonicalApos& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Heteroclinic, "loop_stability_integral");
  const Poly2 f = dqdy(c);
  const double X = c.a / std::sqrt(-2.0 * c.b);
  require_zero_saddle_divergence(f, X, "loop_stability_integral");
  require_zero_saddle_divergence(f, -X, "loop_stability_integral");
  if (f.is_zero()) return 0.0;
  const real B = -static_cast<real>(c.b), A = c.a, kappa = std::sqrt(B) / A, X2 = A * A / (2 * B);
  // dt = dx / y along A1. The saddle values, accepted as zero above, are subtracted so that
  // their rounding residue does not produce a logarithmic tail.
  const real fl = f(-static_cast<real>(X), real(0)), fr = f(static_cast<real>(X), real(0));
  auto integrand = [&](double x) {
    const real xl = x;
    const real y = kappa * (X2 - xl * xl);
    const real base = fl + (fr - fl) * (xl + X) / (2 * static_cast<real>(X));
    return static_cast<double>((f(xl, y) - base) / y);
  };
  return integrate(integrand, -X, X, "loop_stability_integral").value;
}

double loop_flux_integral(const CanonicalApos& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Heteroclinic, "loop_flux_integral");
  const Poly2 f = dqdy(c);
  const double X = c.a / std::sqrt(-2.0 * c.b);
  return integrate([&](double x) { return f(x, loop_y_apos(c.a, c.b, x)); }, -X, X, "loop_flux_integral").value;
}

// ---- aneg ----

double m2_closed(const CanonicalAneg& c) {
  const double a = c.a, b = c.b, sb = std::sqrt(b), b32 = b * sb, b52 = b * b * sb;
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a, a6 = a3 * a3;
  const double e1 = c.ek(1), e2 = c.ek(2), e3 = c.ek(3), e4 = c.ek(4), e5 = c.ek(5), e6 = c.ek(6), e7 = c.ek(7),
               e8 = c.ek(8), e9 = c.ek(9);
  return a2 / (110880 * b * b * b * b) *
         (32 * kSqrt2 *
              (1155 * b * b * b * e3 + 99 * a2 * b * b * (21 * e2 + 2 * e4) + 32263 * a6 * e5 +
               5 * a4 * b * (1551 * e1 + 8 * e6) + 1155 * a * b52 * e7 + 3927 * a3 * b32 * e8 + 15675 * a5 * sb * e9) -
          3465 * a *
              (32 * a3 * b * e1 + 8 * a * b * b * e2 + 134 * a5 * e5 + 4 * b52 * e7 + 16 * a2 * b32 * e8 +
               65 * a4 * sb * e9) *
              kPi);
}

namespace {

// Integral over u in [0, sqrt(2)] (right loop) or [-sqrt(2), 0] (left loop) of the upper
// branch, written with u = +-sqrt(2) sin(phi) so that the endpoint square root disappears.
template <class F>
Quad aneg_upper_integral(const CanonicalAneg& c, bool right, F integrand_x_y_dxdphi, const char* who) {
  const AnegParam p{-c.a, std::sqrt(c.b)};
  const double sgn = right ? 1.0 : -1.0;
  auto f = [&](double ph) {
    const double u = sgn * kSqrt2 * std::sin(ph);
    const double dxdphi = p.A / p.sb * kSqrt2 * std::cos(ph);
    return integrand_x_y_dxdphi(p.x(u), p.y(u), dxdphi, ph);
  };
  return integrate(f, 0.0, kPi / 2, who);
}

}  // namespace

MelnikovResult m2_quadrature(const CanonicalAneg& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Homoclinic, "m2_quadrature");
  const Poly2 q = perturbation(c);
  const Quad r = aneg_upper_integral(
      c, true, [&](double x, double y, double dxdphi, double) { return q(x, y) * dxdphi; }, "m2_quadrature");
  return {m2_closed(c), r.value, r.error, kM2OrientationSign};
}

double m2_left_loop(const CanonicalAneg& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Homoclinic, "m2_left_loop");
  const Poly2 q = perturbation(c);
  return aneg_upper_integral(
             c, false, [&](double x, double y, double dxdphi, double) { return q(x, y) * dxdphi; }, "m2_left_loop")
      .value;
}

double phi1_aneg(const CanonicalAneg& c) {
  const double a = c.a, b = c.b, sb = std::sqrt(b), b32 = b * sb, b52 = b * b * sb;
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a, a6 = a3 * a3;
  const double e1 = c.ek(1), e3 = c.ek(3), e4 = c.ek(4), e5 = c.ek(5), e6 = c.ek(6), e7 = c.ek(7), e8 = c.ek(8),
               e9 = c.ek(9);
  return (-32 * kSqrt2 *
              (1155 * b * b * b * e3 + 198 * a2 * b * b * e4 + 32263 * a6 * e5 + 5 * a4 * b * (1551 * e1 + 8 * e6) +
               1155 * a * b52 * e7 + 3927 * a3 * b32 * e8 + 15675 * a5 * sb * e9) +
          3465 * a * (32 * a3 * b * e1 + 134 * a5 * e5 + 4 * b52 * e7 + 16 * a2 * b32 * e8 + 65 * a4 * sb * e9) * kPi) /
         (5544 * a2 * b * b * (12 * kSqrt2 - 5 * kPi));
}

double div_q1(const CanonicalAneg& c) {
  const double a = c.a, b = c.b, sb = std::sqrt(b), b32 = b * sb, b52 = b * b * sb;
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a, a6 = a3 * a3;
  const double e1 = c.ek(1), e3 = c.ek(3), e4 = c.ek(4), e5 = c.ek(5), e6 = c.ek(6), e7 = c.ek(7), e8 = c.ek(8),
               e9 = c.ek(9);
  return c.eps *
         (-64 * kSqrt2 *
              (-462 * b * b * b * e3 + 99 * a2 * b * b * e4 + 15092 * a6 * e5 + a4 * b * (2838 * e1 + 20 * e6) -
               462 * a * b52 * e7 + 924 * a3 * b32 * e8 + 6798 * a5 * sb * e9) +
          3465 * (24 * a4 * b * e1 - 8 * b * b * b * e3 + 126 * a6 * e5 - 4 * a * b52 * e7 + 8 * a3 * b32 * e8 +
                  57 * a5 * sb * e9) *
              kPi) /
         (5544 * b * b * b * (12 * kSqrt2 - 5 * kPi));
}

double phi2_aneg(const CanonicalAneg& c) {
  const double a = c.a, b = c.b, sb = std::sqrt(b), b52 = b * b * sb;
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a, a6 = a3 * a3;
  const double e3 = c.ek(3), e4 = c.ek(4), e5 = c.ek(5), e6 = c.ek(6), e7 = c.ek(7), e8 = c.ek(8), e9 = c.ek(9);
  return (64 * kSqrt2 *
              (462 * b * b * b * e3 - 99 * a2 * b * b * e4 - 15092 * a6 * e5 - 20 * a4 * b * e6 + 462 * a * b52 * e7 -
               924 * a3 * b * sb * e8 - 6798 * a5 * sb * e9) +
          3465 * (126 * a6 * e5 + sb * (-8 * b52 * e3 - 4 * a * b * b * e7 + 8 * a3 * b * e8 + 57 * a5 * e9)) * kPi) /
         (264 * a4 * b * (688 * kSqrt2 - 315 * kPi));
}

double phi3_aneg_printed(const CanonicalAneg& c) {
  const double a = c.a, b = c.b, sb = std::sqrt(b), b32 = b * sb, b52 = b * b * sb;
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a, a6 = a3 * a3;
  const double e3 = c.ek(3), e4 = c.ek(4), e6 = c.ek(6), e7 = c.ek(7), e8 = c.ek(8), e9 = c.ek(9);
  const double r2 = kSqrt2, pi = kPi;
  const double K1 = 1.0 / (22 * a6 * (-429824 + 40320 * r2 - 99225 * pi + 154035 * r2 * pi));
  const double inner =
      -39424 * b52 * e3 - 3252480 * r2 * b52 * e3 - 1626240 * a2 * b32 * e4 - 665280 * r2 * a2 * b32 * e4 -
      622080 * a4 * sb * e6 - 134400 * r2 * a4 * sb * e6 - 39424 * a * b * b * e7 - 73920 * r2 * a * b * b * e7 +
      78848 * a3 * b * e8 + 147840 * r2 * a3 * b * e8 - 630784 * a5 * e9 - 123200 * r2 * a5 * e9 +
      1034880 * r2 * b52 * e3 * pi + 582120 * r2 * a2 * b32 * e4 * pi + 184800 * r2 * a4 * sb * e6 * pi +
      32340 * r2 * a * b * b * e7 * pi - 64680 * r2 * a3 * b * e8 * pi - 121275 * a5 * e9 * pi +
      266805 * r2 * a5 * e9 * pi;
  return -3 * sb * K1 * inner;
}

CanonicalAneg impose_loop_surface(CanonicalAneg c) {
  c.ek(1) = phi2_aneg(c);
  c.ek(2) = phi1_aneg(c);
  return c;
}

double loop_stability_integral(const CanonicalAneg& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Homoclinic, "loop_stability_integral");
  const Poly2 f = dqdy(c);
  require_zero_saddle_divergence(f, c.a / std::sqrt(c.b), "loop_stability_integral");
  if (f.is_zero()) return 0.0;
  // dx / y = sqrt(2) dphi / sin(phi); the integrand is regular once dQ/dy vanishes at the saddle.
  const real A = -static_cast<real>(c.a), sb = std::sqrt(static_cast<real>(c.b)), r2 = std::sqrt(2.0L);
  const real f0 = f(-A / sb, real(0));
  auto integrand = [&](double ph) {
    const real s = std::sin(static_cast<real>(ph)), co = std::cos(static_cast<real>(ph));
    const real u = r2 * s;
    const real x = A * (u - 1) / sb, y = A / (2 * sb) * u * r2 * co;
    return static_cast<double>((f(x, y) - f0) * r2 / s);
  };
  return integrate(integrand, 0.0, kPi / 2, "loop_stability_integral").value;
}

double loop_flux_integral(const CanonicalAneg& c, const LoopGeometry& g) {
  check_loop(g, c.a, c.b, LoopKind::Homoclinic, "loop_flux_integral");
  const Poly2 f = dqdy(c);
  return aneg_upper_integral(
             c, true, [&](double x, double y, double dxdphi, double) { return f(x, y) * dxdphi; },
             "loop_flux_integral")
      .value;
}

double phi3_aneg(const CanonicalAneg& c) {
  const LoopGeometry g = loop_aneg(c.a, c.b);
  // The stability integral is affine in e5 on the loop surface.
  auto I = [&](double e5) {
    CanonicalAneg t = c;
    t.ek(5) = e5;
    return loop_stability_integral(impose_loop_surface(t), g);
  };
  const double i0 = I(0.0), i1 = I(1.0);
  if (i1 == i0) throw std::domain_error("phi3_aneg: stability integral does not depend on e5");
  return -i0 / (i1 - i0);
}

}  // namespace cycleforge
