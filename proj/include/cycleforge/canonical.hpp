#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cycleforge/field.hpp"

namespace cycleforge {

/// Canonical form for a > 0, b < 0:
///   xdot = y, ydot = -x - (2b/a^2) x^3 + eps Q1,
///   Q1 = (d3 + d2 x^2 + d1 x^4 + d4 y^2 + d5 x^6 + d6 y^4) y.
struct CanonicalApos {
  double a = 1.0;
  double b = -1.0;
  std::array<double, 6> d{};  // d[k-1] holds d_k
  double eps = 0.0;

  double& dk(int k) { return d.at(static_cast<std::size_t>(k - 1)); }
  double dk(int k) const { return d.at(static_cast<std::size_t>(k - 1)); }
  void validate() const;
};

/// Canonical form for a < 0, b > 0 (saddle-center pair translated to the origin):
///   xdot = y, ydot = -x + (3 sqrt(b)/(2a)) x^2 - (b/(2a^2)) x^3 + eps Q2,
///   Q2 = (e3 + e7 x + e2 x^2 + e8 x^3 + e1 x^4 + e9 x^5 + e5 x^6 + e4 y^2 + e6 y^4) y.
struct CanonicalAneg {
  double a = -1.0;
  double b = 1.0;
  std::array<double, 9> e{};  // e[k-1] holds e_k
  double eps = 0.0;

  double& ek(int k) { return e.at(static_cast<std::size_t>(k - 1)); }
  double ek(int k) const { return e.at(static_cast<std::size_t>(k - 1)); }
  void validate() const;
};

/// Exponents (x-power, y-power) of the monomial multiplying d_k and e_k inside Q.
std::array<int, 2> d_monomial(int k);
std::array<int, 2> e_monomial(int k);

/// d_k = c_k / a^{m_k/2}, m = (5, 3, 1, 1, 7, 1).
CanonicalApos to_canonical_apos(const OscParams& p);
/// e_1..e_9 from the closed formulas of the translated, rescaled system.
CanonicalAneg to_canonical_aneg(const OscParams& p);

PlanarField canonical_field(const CanonicalApos& c);
PlanarField canonical_field(const CanonicalAneg& c);

/// Perturbation polynomial Q (so that F2 = unperturbed + eps * Q).
Poly2 perturbation(const CanonicalApos& c);
Poly2 perturbation(const CanonicalAneg& c);

/// H1 = x^2/2 + b x^4/(2 a^2) + y^2/2.
double canonical_hamiltonian(const CanonicalApos& c, double x, double y);
/// H2 = x^2/2 - sqrt(b)/(2a) x^3 + b/(8 a^2) x^4 + y^2/2.
double canonical_hamiltonian(const CanonicalAneg& c, double x, double y);

/// Canonical field obtained by pushing system (x, y, t) forward through the
/// affine map and time rescaling, computed by polynomial substitution only.
PlanarField pushforward_apos(const OscParams& p);
PlanarField pushforward_aneg(const OscParams& p);

struct ConjugacyReport {
  double max_residual = 0.0;
  int n_samples = 0;
  /// Per-coefficient check of the closed e/d formulas against the pushforward.
  std::vector<std::string> coefficient_names;
  std::vector<double> coefficient_rel_err;
  std::vector<std::string> flagged;  // coefficients with rel err > 1e-10
};

/// Samples n_samples points (seeded) in the unit disk of canonical coordinates and
/// compares the canonical field against the transformed original field, including
/// the time rescaling. Residual is |difference| / (sum of |monomial terms|).
ConjugacyReport verify_conjugacy(const OscParams& p, int n_samples, std::uint64_t seed = 1);

}  // namespace cycleforge
