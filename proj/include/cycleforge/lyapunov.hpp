#pragma once

#include <optional>
#include <vector>

#include "cycleforge/canonical.hpp"
#include "cycleforge/field.hpp"
#include "cycleforge/simulate.hpp"

namespace cycleforge {

enum class Regime { Apos, Aneg };
std::string to_string(Regime r);

struct LyapunovEntry {
  int order = 0;       // k, value is V_{2k+1}
  double value = 0.0;  // closed-form value, always evaluated
  bool valid = false;  // all lower-order V vanish below the gate tolerance
};

struct LyapunovSpectrum {
  Regime regime = Regime::Apos;
  std::vector<LyapunovEntry> entries;  // orders 0..5: V1, V3, ..., V11
  double gate_tolerance = 0.0;         // 1e-9 * |eps|
  std::optional<double> v11_sign_surrogate;  // aneg only

  double v(int index) const;  // V_index for index in {1, 3, ..., 11}
  /// Index of the first valid nonzero V (above the gate), or 0 when all vanish.
  int first_nonzero() const;
};

/// Closed-form V3..V11 for the apos canonical form; requires d3 = 0 and eps != 0.
LyapunovSpectrum closed_v_apos(const CanonicalApos& c);
/// Closed-form V3..V11 for the aneg canonical form; requires e3 = 0 and eps != 0.
LyapunovSpectrum closed_v_aneg(const CanonicalAneg& c);

/// Small-eps sign surrogate of V11 in the aneg regime.
double v11_sign_surrogate(const CanonicalAneg& c);

/// Imposes the vanishing conditions of V3, ..., V_{2 stage + 1} (stage 0..4).
/// Stage 5 additionally sets d4 = 0 (the center chain).
CanonicalApos impose_chain_apos(CanonicalApos c, int stage);
/// Imposes the vanishing conditions of V3, ..., V_{2 stage + 1} (stage 0..4).
CanonicalAneg impose_chain_aneg(CanonicalAneg c, int stage);

inline constexpr int kMaxSeriesOrder = 12;

struct ReturnSeries {
  std::vector<double> u;  // u[i-1] = u_i(2 pi), i = 1..order
  int order = 0;
  double error_estimate = 0.0;
  double coeff(int i) const { return u.at(static_cast<std::size_t>(i - 1)); }
};

/// Arithmetic of the series integration; Quad (binary128) removes the round-off floor
/// of about 1e-14 seen on high-order coefficients when intermediate values are large.
enum class SeriesPrecision { Extended, Quad };

struct SeriesOptions {
  int steps = 512;           // fixed RKF78 steps over [0, 2 pi]; error from steps vs 2 steps
  double tolerance = 1e-12;  // max allowed step-halving difference
  SeriesPrecision precision = SeriesPrecision::Extended;
};

/// Return-map series r(2 pi) = sum u_i r0^i from the polar expansion of f.
/// Theta increases from 0 to 2 pi, which for the clockwise rotation xdot = y,
/// ydot = -x is the backward-time return map.
ReturnSeries numeric_series(const PlanarField& f, int order, const SeriesOptions& opt = {});

struct DisplacementFit {
  std::vector<double> radii;
  std::vector<double> displacement;  // forward-time d(r) = h(r) - r
  std::vector<double> coefficients;  // coefficients of r^3, r^5, ...
  double residual_norm = 0.0;
};

std::vector<double> default_fit_radii();

/// Fits an odd polynomial c3 r^3 + c5 r^5 + ... to forward-time displacements.
DisplacementFit displacement_fit(const PlanarField& f, const std::vector<double>& radii,
                                 const IntegratorConfig& cfg = {}, int n_terms = 4);

}  // namespace cycleforge
