#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cycleforge/field.hpp"

namespace cycleforge {

/// Axis-aligned box; leaving it aborts an integration.
struct Box {
  double xmin = -1e6, xmax = 1e6, ymin = -1e6, ymax = 1e6;
  bool contains(double x, double y) const { return x >= xmin && x <= xmax && y >= ymin && y <= ymax; }
};

struct IntegratorConfig {
  double rel_tol = 1e-14;
  double abs_tol = 1e-14;
  double energy_tol = 1e-18;  // relative error target of the energy balance (long double)
  double max_step = 0.1;
  int order = 8;              // 5: Dormand-Prince, 8: Runge-Kutta-Fehlberg 7(8)
  int max_events = 1;         // section crossings before poincare_return stops
  long max_steps = 2000000;
  Box escape_box{};

  /// Throws std::invalid_argument unless tolerances lie in [1e-14, 1e-6], energy_tol in
  /// [1e-19, 1e-6], and order is 5 or 8.
  void validate() const;
};

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an orbit leaves the escape box.
class EscapeError : public IntegrationError {
 public:
  using IntegrationError::IntegrationError;
};

struct Trajectory {
  std::vector<double> t, x, y;
};

/// Adaptive integration over [0, t_span]. Order 5 samples the dense output every
/// sample_dt (0 keeps only accepted steps); order 8 records accepted steps.
Trajectory integrate(const PlanarField& f, std::array<double, 2> x0, double t_span, const IntegratorConfig& cfg,
                     double sample_dt = 0.0);

struct ReturnResult {
  double h = 0.0;           // first return abscissa on {y = 0, x > 0}
  double displacement = 0.0;  // h - x0, accumulated without cancellation when possible
  double period = 0.0;
  double x_min = 0.0, x_max = 0.0;  // extent of the orbit in x
  bool energy_split = false;        // displacement obtained from the energy balance
  double noise = 0.0;               // estimated integration error of displacement
};

/// First return of (x0, 0) to the positive x-axis, crossing from y > 0 to y < 0.
/// When f has the form xdot = y, ydot = g(x) + p(x, y) with p divisible by y, the
/// displacement is computed from the energy balance dH = int y p dt.
ReturnResult poincare_return(const PlanarField& f, double x0, const IntegratorConfig& cfg);

enum class Stability { Stable, Unstable };
enum class AmplitudeClass { Small, Large };
std::string to_string(Stability s);
std::string to_string(AmplitudeClass a);

struct CycleInfo {
  double section_x = 0.0;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double period = 0.0;
  Stability stability = Stability::Stable;
  AmplitudeClass amplitude_class = AmplitudeClass::Small;
  double slope = 0.0;  // finite-difference d'(section_x)
  bool hyperbolic = true;
};

struct LimitCycleReport {
  std::vector<CycleInfo> cycles;
  std::vector<std::pair<double, double>> displacement_samples;  // (x0, d(x0))
  std::vector<double> escaped;     // scan points whose orbit left the box
  std::vector<double> unresolved;  // scan points with |d| under the noise estimate
  std::pair<double, double> search_interval{0.0, 0.0};
};

struct CycleSearchOptions {
  double locator_tol = 1e-8;
  double noise_floor = 0.0;    // absolute floor on |d| for a resolved sample
  double noise_factor = 10.0;  // multiple of the per-point error estimate treated as noise
  double slope_step = 1e-3;    // relative step for the root slope
  std::optional<double> loop_crossing;  // section crossing of the unperturbed loop; enables amplitude classes
  double large_fraction = 0.9;          // cycles crossing at or beyond this fraction of it are Large
  bool parallel = true;               // OpenMP scan; false selects the serial reference
};

/// Geometric scan ladder of n points from lo to hi.
std::vector<double> geometric_ladder(double lo, double hi, int n);

/// First returns on a ladder; escaped points carry NaN fields.
std::vector<ReturnResult> scan_returns(const PlanarField& f, const std::vector<double>& xs,
                                      const IntegratorConfig& cfg, bool parallel);

/// Displacements only; escaped points yield NaN.
std::vector<double> scan_displacement(const PlanarField& f, const std::vector<double>& xs, const IntegratorConfig& cfg,
                                      bool parallel);

LimitCycleReport find_cycles(const PlanarField& f, std::pair<double, double> interval, int n_scan,
                             const IntegratorConfig& cfg, const CycleSearchOptions& opt = {});

/// Number of worker threads, from CYCLEFORGE_THREADS when set.
int configured_threads();

}  // namespace cycleforge
