#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

namespace cycleforge {

inline constexpr int kMaxDegree = 7;

/// Dense bivariate polynomial sum c_ij x^i y^j with total degree <= kMaxDegree.
class Poly2 {
 public:
  struct Term {
    int i;
    int j;
    double coeff;
  };

  Poly2() = default;

  static Poly2 monomial(int i, int j, double c);

  double coeff(int i, int j) const;
  /// Accumulates c onto the x^i y^j coefficient.
  void add(int i, int j, double c);
  void set(int i, int j, double c);

  /// Nonzero terms only, ordered by (total degree, i descending).
  std::vector<Term> terms() const;
  int degree() const;
  bool is_zero() const { return terms().empty(); }

  template <class T>
  T operator()(T x, T y) const {
    std::array<T, kMaxDegree + 1> xp{}, yp{};
    xp[0] = yp[0] = T(1);
    for (int k = 1; k <= kMaxDegree; ++k) {
      xp[k] = xp[k - 1] * x;
      yp[k] = yp[k - 1] * y;
    }
    T acc(0);
    for (int i = 0; i <= kMaxDegree; ++i)
      for (int j = 0; i + j <= kMaxDegree; ++j)
        if (const double c = c_[idx(i, j)]; c != 0.0) acc += T(c) * xp[i] * yp[j];
    return acc;
  }

  /// Homogeneous degree-k part evaluated at (x, y).
  template <class T>
  T homogeneous(int k, T x, T y) const {
    T acc(0);
    for (int i = 0; i <= k; ++i) {
      const double c = c_[idx(i, k - i)];
      if (c == 0.0) continue;
      T term(c);
      for (int p = 0; p < i; ++p) term *= x;
      for (int p = 0; p < k - i; ++p) term *= y;
      acc += term;
    }
    return acc;
  }

  Poly2 dx() const;
  Poly2 dy() const;

  /// Substitutes x -> x0 + sx * x and y -> sy * y.
  Poly2 affine(double x0, double sx, double sy) const;

  Poly2 operator+(const Poly2& o) const;
  Poly2 operator-(const Poly2& o) const;
  Poly2 operator*(double s) const;

  std::string to_string() const;

 private:
  static constexpr int idx(int i, int j) { return i * (kMaxDegree + 1) + j; }
  std::array<double, (kMaxDegree + 1) * (kMaxDegree + 1)> c_{};
};

/// Planar polynomial vector field (F1, F2).
struct PlanarField {
  Poly2 f1;
  Poly2 f2;

  template <class T>
  std::array<T, 2> operator()(T x, T y) const {
    return {f1(x, y), f2(x, y)};
  }
  int degree() const;
  /// True when the linear part is exactly xdot = y, ydot = -x.
  bool has_unit_rotation_linear_part(double tol = 0.0) const;
};

PlanarField operator+(const PlanarField& f, const PlanarField& g);

/// Physical parameters of
///   xdot = y,
///   ydot = -a x - 2 b x^3 + eps (c3 + c2 x^2 + c1 x^4 + c4 y^2 + c5 x^6 + c6 y^4) y.
///
/// NOTE: b is the coefficient of the *halved* cubic stiffness. The restoring
/// force is -2 b x^3, so the potential is a x^2 / 2 + b x^4 / 2. Do not store 2b.
struct OscParams {
  double a = 1.0;
  double b = -1.0;
  std::array<double, 6> c{};  // c[k-1] holds c_k
  double eps = 0.0;

  double& ck(int k) { return c.at(static_cast<std::size_t>(k - 1)); }
  double ck(int k) const { return c.at(static_cast<std::size_t>(k - 1)); }

  /// Throws std::invalid_argument on a*b >= 0 or |eps| > eps_max.
  void validate(double eps_max = 0.1) const;
};

/// Focus and Degenerate only arise when classifying perturbed fields.
enum class EquilibriumKind { Center, Saddle, WeakFocus, Focus, Degenerate };

struct Equilibrium {
  std::array<double, 2> position{};
  EquilibriumKind kind = EquilibriumKind::Center;
  std::array<std::complex<double>, 2> eigenvalues{};
};

std::string to_string(EquilibriumKind k);

PlanarField build_system(const OscParams& p);

/// Equilibria of the unperturbed system: O and p1, p2 = (+-sqrt(-a/2b), 0).
std::vector<Equilibrium> equilibria(const OscParams& p);

/// H = (y^2 + a x^2 + b x^4) / 2; first integral of build_system at eps = 0.
double hamiltonian(const OscParams& p, double x, double y);

double divergence_at(const PlanarField& f, std::array<double, 2> pt);

/// Classifies an equilibrium of f at pt from its Jacobian.
Equilibrium classify(const PlanarField& f, std::array<double, 2> pt);

}  // namespace cycleforge
