#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cycleforge/bautin.hpp"
#include "cycleforge/canonical.hpp"
#include "cycleforge/lyapunov.hpp"
#include "cycleforge/simulate.hpp"

namespace cycleforge {

/// Section interval, escape box and loop extent for cycle searches around the canonical focus.
struct SearchSetup {
  std::pair<double, double> interval{0.0, 0.0};
  double loop_extent = 0.0;    // max |x| over the unperturbed loop(s)
  double loop_crossing = 0.0;  // crossing of the bounding loop with the positive x-axis
  Box escape_box;
};

/// apos: interval (1e-4, 0.999 X) on the positive x-axis, X the saddle abscissa.
/// aneg: interval (1e-4, 0.999 x_r) with x_r the crossing of the right homoclinic loop.
/// The escape box is four times the unperturbed loop bounding box.
SearchSetup search_setup(Regime regime, double a, double b);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;  // wall time; excluded from reports
  double runtime_limit = 0.0;  // seconds, 0 when unconstrained
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<std::string> findings;  // documented deviations observed during the run
  std::string summary;

  double metric(const std::string& key) const;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  std::optional<int> draws;         // overrides the per-criterion draw counts
  std::optional<Regime> regime;     // restricts the oracle criteria to one regime
  std::vector<int> criteria;        // empty selects default_criteria(regime)
  bool parallel = true;             // OpenMP over draws; false is the serial reference
  double one_cycle_eps = 0.01;
  double two_cycle_eps = 0.05;
};

/// All nine criteria without a regime; the oracle criteria of that regime otherwise.
std::vector<int> default_criteria(const std::optional<Regime>& regime);

CriterionResult run_criterion(int id, const VerifyOptions& opt);
std::vector<CriterionResult> run_suite(const VerifyOptions& opt);

/// Deterministic per-draw seed so that draws are independent of evaluation order.
std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

/// Random canonical draws: a, |b| in [0.5, 2], coefficients in [-1, 1], eps = 0.01.
CanonicalApos random_apos(std::uint64_t seed);
CanonicalAneg random_aneg(std::uint64_t seed);
/// Random physical parameters of the requested sign pattern, coefficients in [-1, 1], eps = 0.05.
OscParams random_params(Regime regime, std::uint64_t seed);

}  // namespace cycleforge
