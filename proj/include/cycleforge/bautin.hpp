#pragma once

#include <array>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cycleforge/canonical.hpp"
#include "cycleforge/lyapunov.hpp"
#include "cycleforge/simulate.hpp"

namespace cycleforge {

inline constexpr int kMaxEpsDegree = 8;

/// Polynomial in eps; coeffs[k] multiplies eps^k.
struct EpsPolynomial {
  std::string name;
  std::vector<double> coeffs;

  double operator()(double eps) const;
  int degree() const;  // -1 for the zero polynomial
};

/// Requires sign * (value - threshold) > 0.
struct SignConstraint {
  std::string name;
  int sign = 1;
  double value = 0.0;
  double threshold = 0.0;
  bool satisfied() const { return sign * (value - threshold) > 0.0; }
};

/// s small cycles per focus, m loop layers, k loop-break count (aneg only).
struct Configuration {
  int s = 0;
  int m = 0;
  int k = 0;
};

struct PerturbationSchedule {
  Regime regime = Regime::Apos;
  double a = 0.0, b = 0.0;
  Configuration target;
  std::vector<EpsPolynomial> assignments;  // d1..d6 or e1..e9, in index order
  std::vector<SignConstraint> sign_constraints;
  std::vector<std::pair<std::string, double>> coefficients;  // named schedule coefficients (d62, e50, ...)
  std::string provenance;
  std::vector<std::string> notes;

  const EpsPolynomial& assignment(const std::string& name) const;
  /// Named coefficient; throws std::out_of_range when absent.
  double coefficient(const std::string& name) const;
};

struct SmallAposChoices {
  double d4 = 1.0;
  double d63 = 1.0, d54 = -1.0, d15 = 1.0, d26 = -1.0, d37 = 1.0;
};

struct MixedAposChoices {
  double d51 = -1.0, d12 = -1.0, d23 = 1.0;
  double small_magnitude = 1.0;  // size of the small-cycle knob and trace terms
};

struct SmallAnegChoices {
  double e4 = 0.0, e6 = 0.0, e8 = 0.0;
  std::optional<double> e7;   // default: threshold plus margin
  double e51 = 1.0;
  std::optional<double> e92;  // default: threshold with margin factor 2
  double e13 = 1.0, e24 = -1.0, e35 = 1.0;
};

struct MixedAnegChoices {
  double layer_magnitude = 1.0;
  double small_magnitude = 1.0;
};

/// Nested weak-focus schedule with s sign alternations (apos, s in 1..5).
PerturbationSchedule schedule_small_apos(int s, double a, double b, const SmallAposChoices& ch = {});
/// Loop layers (d5, d1, d2) for m in 0..3 beneath s small cycles; m = 0 delegates to the small schedule.
PerturbationSchedule schedule_mixed_apos(int s, int m, double a, double b, const MixedAposChoices& ch = {});
/// Nested weak-focus schedule for the aneg form (s in 1..5).
PerturbationSchedule schedule_small_aneg(int s, double a, double b, const SmallAnegChoices& ch = {});
/// Loop layers (e5, e1) for m in 0..2, a break layer on e2 (k = 1 outward, k = 2 inward), and s small cycles.
PerturbationSchedule schedule_mixed_aneg(int s, int m, int k, double a, double b, const MixedAnegChoices& ch = {});

struct RealizedSchedule {
  Regime regime = Regime::Apos;
  double eps = 0.0;
  Configuration target;
  Configuration predicted;  // s from the sign alternation of the evaluated V chain
  std::variant<CanonicalApos, CanonicalAneg> params;
  std::array<double, 6> v{};  // V1, V3, ..., V11; V1 from the trace term
  std::optional<Stability> innermost_forward;  // forward-time stability of the innermost small cycle
  std::optional<Stability> innermost_claimed;  // classification claimed by the reference construction, where it makes one
  int small_total = 0;  // small cycles counting both foci (aneg doubles)
  int large_total = 0;  // large cycles implied by the loop layers

  const CanonicalApos& apos() const { return std::get<CanonicalApos>(params); }
  const CanonicalAneg& aneg() const { return std::get<CanonicalAneg>(params); }
};

/// Evaluates every assignment at eps (0 < |eps| <= 0.1).
RealizedSchedule realize(const PerturbationSchedule& sch, double eps);

/// Number of consecutive alternations with |V_low / V_high| < 0.1 counted upward from the
/// lowest nonzero V; entries of V3..V11 under gate count as zero.
int count_alternations(const std::array<double, 6>& v, double gate);

/// Printed loop-base coefficients (d50, d10, d20) next to the values derived from phi3, phi2, phi1.
struct LoopBaseComparison {
  std::array<std::string, 3> names{"d50", "d10", "d20"};
  std::array<double, 3> printed{}, derived{};
};
LoopBaseComparison compare_printed_loop_base(const CanonicalApos& base);

}  // namespace cycleforge
