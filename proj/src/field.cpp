#include "cycleforge/field.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cycleforge {

namespace {

void check_exponents(int i, int j) {
  if (i < 0 || j < 0 || i + j > kMaxDegree)
    throw std::out_of_range("Poly2: monomial x^" + std::to_string(i) + " y^" + std::to_string(j) +
                            " exceeds degree " + std::to_string(kMaxDegree));
}

// Binomial coefficients up to kMaxDegree.
double binom(int n, int k) {
  double r = 1.0;
  for (int t = 1; t <= k; ++t) r = r * (n - k + t) / t;
  return r;
}

}  // namespace

Poly2 Poly2::monomial(int i, int j, double c) {
  Poly2 p;
  p.set(i, j, c);
  return p;
}

double Poly2::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i + j > kMaxDegree) return 0.0;
  return c_[idx(i, j)];
}

void Poly2::add(int i, int j, double c) {
  check_exponents(i, j);
  c_[idx(i, j)] += c;
}

void Poly2::set(int i, int j, double c) {
  check_exponents(i, j);
  c_[idx(i, j)] = c;
}

std::vector<Poly2::Term> Poly2::terms() const {
  std::vector<Term> out;
  for (int k = 0; k <= kMaxDegree; ++k)
    for (int i = k; i >= 0; --i)
      if (const double c = c_[idx(i, k - i)]; c != 0.0) out.push_back({i, k - i, c});
  return out;
}

int Poly2::degree() const {
  int d = -1;
  for (const auto& t : terms()) d = std::max(d, t.i + t.j);
  return d;
}

Poly2 Poly2::dx() const {
  Poly2 r;
  for (const auto& t : terms())
    if (t.i > 0) r.add(t.i - 1, t.j, t.coeff * t.i);
  return r;
}

Poly2 Poly2::dy() const {
  Poly2 r;
  for (const auto& t : terms())
    if (t.j > 0) r.add(t.i, t.j - 1, t.coeff * t.j);
  return r;
}

Poly2 Poly2::affine(double x0, double sx, double sy) const {
  Poly2 r;
  for (const auto& t : terms()) {
    // (x0 + sx X)^i (sy Y)^j
    const double ys = std::pow(sy, t.j);
    for (int k = 0; k <= t.i; ++k)
      r.add(k, t.j, t.coeff * ys * binom(t.i, k) * std::pow(sx, k) * std::pow(x0, t.i - k));
  }
  return r;
}

Poly2 Poly2::operator+(const Poly2& o) const {
  Poly2 r = *this;
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += o.c_[k];
  return r;
}

Poly2 Poly2::operator-(const Poly2& o) const { return *this + o * -1.0; }

Poly2 Poly2::operator*(double s) const {
  Poly2 r = *this;
  for (auto& c : r.c_) c *= s;
  return r;
}

std::string Poly2::to_string() const {
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& t : terms()) {
    if (!first) os << " + ";
    first = false;
    os << t.coeff;
    if (t.i) os << "*x^" << t.i;
    if (t.j) os << "*y^" << t.j;
  }
  if (first) os << "0";
  return os.str();
}

int PlanarField::degree() const { return std::max(f1.degree(), f2.degree()); }

bool PlanarField::has_unit_rotation_linear_part(double tol) const {
  return std::abs(f1.coeff(1, 0)) <= tol && std::abs(f1.coeff(0, 1) - 1.0) <= tol &&
         std::abs(f2.coeff(1, 0) + 1.0) <= tol && std::abs(f2.coeff(0, 1)) <= tol &&
         std::abs(f1.coeff(0, 0)) <= tol && std::abs(f2.coeff(0, 0)) <= tol;
}

PlanarField operator+(const PlanarField& f, const PlanarField& g) { return {f.f1 + g.f1, f.f2 + g.f2}; }

void OscParams::validate(double eps_max) const {
  if (!std::isfinite(a) || !std::isfinite(b) || a == 0.0 || b == 0.0)
    throw std::invalid_argument("OscParams: a and b must be finite and nonzero");
  if (a * b >= 0.0)
    throw std::invalid_argument("OscParams: requires a*b < 0 (got a=" + std::to_string(a) +
                                ", b=" + std::to_string(b) + ")");
  for (double ck : c)
    if (!std::isfinite(ck)) throw std::invalid_argument("OscParams: non-finite c coefficient");
  if (!std::isfinite(eps) || std::abs(eps) > eps_max)
    throw std::invalid_argument("OscParams: |eps| exceeds eps_max=" + std::to_string(eps_max));
}

std::string to_string(EquilibriumKind k) {
  switch (k) {
    case EquilibriumKind::Center: return "center";
    case EquilibriumKind::Saddle: return "saddle";
    case EquilibriumKind::WeakFocus: return "weak_focus";
    case EquilibriumKind::Focus: return "focus";
    case EquilibriumKind::Degenerate: return "degenerate";
  }
  return "unknown";
}

PlanarField build_system(const OscParams& p) {
  p.validate();
  PlanarField f;
  f.f1.set(0, 1, 1.0);
  f.f2.add(1, 0, -p.a);
  f.f2.add(3, 0, -2.0 * p.b);
  // eps * (c3 + c2 x^2 + c1 x^4 + c4 y^2 + c5 x^6 + c6 y^4) * y
  f.f2.add(0, 1, p.eps * p.ck(3));
  f.f2.add(2, 1, p.eps * p.ck(2));
  f.f2.add(4, 1, p.eps * p.ck(1));
  f.f2.add(0, 3, p.eps * p.ck(4));
  f.f2.add(6, 1, p.eps * p.ck(5));
  f.f2.add(0, 5, p.eps * p.ck(6));
  return f;
}

Equilibrium classify(const PlanarField& f, std::array<double, 2> pt) {
  const auto [x, y] = pt;
  const double j11 = f.f1.dx()(x, y), j12 = f.f1.dy()(x, y);
  const double j21 = f.f2.dx()(x, y), j22 = f.f2.dy()(x, y);
  const double tr = j11 + j22;
  const double det = j11 * j22 - j12 * j21;
  const std::complex<double> disc = std::sqrt(std::complex<double>(tr * tr - 4.0 * det, 0.0));

  Equilibrium e;
  e.position = pt;
  e.eigenvalues = {(tr + disc) / 2.0, (tr - disc) / 2.0};
  const double scale = std::max({std::abs(j11), std::abs(j12), std::abs(j21), std::abs(j22), 1.0});
  if (std::abs(det) <= 1e-14 * scale * scale) {
    e.kind = EquilibriumKind::Degenerate;
  } else if (det < 0.0) {
    e.kind = EquilibriumKind::Saddle;
  } else if (std::abs(tr) <= 1e-14 * scale) {
    const bool divergence_free = (f.f1.dx() + f.f2.dy()).is_zero();
    e.kind = divergence_free ? EquilibriumKind::Center : EquilibriumKind::WeakFocus;
  } else {
    e.kind = EquilibriumKind::Focus;
  }
  return e;
}

std::vector<Equilibrium> equilibria(const OscParams& p) {
  p.validate();
  if (p.eps != 0.0) throw std::invalid_argument("equilibria: only the unperturbed system (eps = 0) is analyzed");
  const PlanarField f = build_system(p);
  const double xs = std::sqrt(-p.a / (2.0 * p.b));
  return {classify(f, {0.0, 0.0}), classify(f, {xs, 0.0}), classify(f, {-xs, 0.0})};
}

double hamiltonian(const OscParams& p, double x, double y) {
  if (p.eps != 0.0) throw std::invalid_argument("hamiltonian: defined for the unperturbed system only");
  const double x2 = x * x;
  return 0.5 * (y * y + p.a * x2 + p.b * x2 * x2);
}

double divergence_at(const PlanarField& f, std::array<double, 2> pt) {
  return f.f1.dx()(pt[0], pt[1]) + f.f2.dy()(pt[0], pt[1]);
}

}  // namespace cycleforge
