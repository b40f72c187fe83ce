#pragma once

#include <string>
#include <vector>

#include "cycleforge/canonical.hpp"
#include "cycleforge/field.hpp"

namespace cycleforge {

enum class LoopKind { Heteroclinic, Homoclinic };
std::string to_string(LoopKind k);

/// Sampled arc (x, y(x)) ordered along the unperturbed flow.
struct LoopArc {
  std::string name;
  std::vector<double> x, y;
};

struct LoopGeometry {
  LoopKind kind = LoopKind::Heteroclinic;
  double a = 0.0, b = 0.0;
  std::vector<LoopArc> arcs;
  std::vector<Equilibrium> saddles;
  double level = 0.0;         // Hamiltonian value on the loop
  double max_residual = 0.0;  // max |H - level| over all samples
  double extent = 0.0;        // max |x| over the loop
};

inline constexpr int kLoopSamples = 2048;

/// Heteroclinic loop of the apos canonical form: upper arc A1 from (-X, 0) to (X, 0)
/// and lower arc A2 back, X = a / sqrt(-2b).
LoopGeometry loop_apos(double a, double b);
/// Homoclinic loops of the aneg canonical form at the saddle q1 = (a / sqrt(b), 0):
/// L_r (upper, lower) and L_l (upper, lower).
LoopGeometry loop_aneg(double a, double b);

/// Upper branch y(x) >= 0 of the apos heteroclinic loop.
double loop_y_apos(double a, double b, double x);
/// Upper branch y(x) >= 0 of the aneg homoclinic loops.
double loop_y_aneg(double a, double b, double x);

struct MelnikovResult {
  double closed_form = 0.0;
  double quadrature = 0.0;
  double abs_error_estimate = 0.0;
  int orientation_sign = 1;  // closed_form = orientation_sign * quadrature
};

/// Frozen orientation: m1_closed = -(flow-oriented integral of Q1 dx over A1).
inline constexpr int kM1OrientationSign = -1;
/// Frozen orientation: m2_closed = +(flow-oriented integral of Q2 dx over the upper branch of L_r).
inline constexpr int kM2OrientationSign = 1;

double m1_closed(const CanonicalApos& c);
/// Integral of Q1 dx along A1 (flow direction) by adaptive Gauss-Kronrod.
MelnikovResult m1_quadrature(const CanonicalApos& c, const LoopGeometry& g);
/// Flow-oriented integral of Q1 dx along the lower arc A2.
double m1_lower_arc(const CanonicalApos& c, const LoopGeometry& g);

/// d2 value that zeroes M1.
double phi1(const CanonicalApos& c);
/// eps * dQ1/dy at the saddles on the surface d2 = phi1.
double div_p2(const CanonicalApos& c);
/// d1 value that zeroes div_p2.
double phi2(const CanonicalApos& c);
/// d5 value that zeroes the loop stability integral once d1 = phi2, d2 = phi1.
double phi3(const CanonicalApos& c);
/// d5 value of the reference closed form; zeroes the dx-flux integral instead.
double phi3_printed(const CanonicalApos& c);

double m2_closed(const CanonicalAneg& c);
/// Integral of Q2 dx along the upper branch of L_r (flow direction).
MelnikovResult m2_quadrature(const CanonicalAneg& c, const LoopGeometry& g);
/// Flow-oriented integral of Q2 dx along the upper branch of L_l.
double m2_left_loop(const CanonicalAneg& c, const LoopGeometry& g);

/// e2 value that zeroes M2.
double phi1_aneg(const CanonicalAneg& c);
/// eps * dQ2/dy at the saddle q1 on the surface e2 = phi1_aneg.
double div_q1(const CanonicalAneg& c);
/// e1 value that zeroes div_q1.
double phi2_aneg(const CanonicalAneg& c);
/// e5 value that zeroes the loop stability integral once e1 = phi2_aneg, e2 = phi1_aneg (numeric).
double phi3_aneg(const CanonicalAneg& c);
/// e5 value of the reference closed form; zeroes the dx-flux integral instead.
double phi3_aneg_printed(const CanonicalAneg& c);

/// Applies d1 = phi2, then d2 = phi1 (the loop-preserving surface with zero saddle divergence).
CanonicalApos impose_loop_surface(CanonicalApos c);
/// Applies e1 = phi2_aneg, then e2 = phi1_aneg.
CanonicalAneg impose_loop_surface(CanonicalAneg c);

/// Integral of dQ/dy dt along A1 (apos) or the upper branch of L_r (aneg); the full loop
/// value is twice this. Throws std::domain_error when dQ/dy does not vanish at the saddle,
/// where the integral diverges.
double loop_stability_integral(const CanonicalApos& c, const LoopGeometry& g);
double loop_stability_integral(const CanonicalAneg& c, const LoopGeometry& g);

/// Integral of dQ/dy dx over the same arcs.
double loop_flux_integral(const CanonicalApos& c, const LoopGeometry& g);
double loop_flux_integral(const CanonicalAneg& c, const LoopGeometry& g);

}  // namespace cycleforge
