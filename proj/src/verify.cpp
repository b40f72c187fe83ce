#include "cycleforge/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <stdexcept>

#include "cycleforge/melnikov.hpp"

namespace cycleforge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kNearZero = 1e-10;

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
};

// Runs body(i) for i in [0, n), in parallel when requested; results land in per-index slots.
template <class T>
std::vector<T> batch(int n, bool parallel, const std::function<T(int)>& body) {
  std::vector<T> out(static_cast<std::size_t>(n));
  std::vector<std::string> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) num_threads(configured_threads()) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      out[static_cast<std::size_t>(i)] = body(i);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  }
  for (int i = 0; i < n; ++i)
    if (!errors[static_cast<std::size_t>(i)].empty())
      throw std::runtime_error("draw " + std::to_string(i) + ": " + errors[static_cast<std::size_t>(i)]);
  return out;
}

double uniform(std::mt19937_64& g, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(g); }

struct OracleError {
  double max_rel = 0.0;
  double max_abs_near_zero = 0.0;
  void add(double closed, double ref) {
    const double diff = std::abs(closed - ref);
    if (std::abs(ref) < kNearZero)
      max_abs_near_zero = std::max(max_abs_near_zero, diff);
    else
      max_rel = std::max(max_rel, diff / std::abs(ref));
  }
  void merge(const OracleError& o) {
    max_rel = std::max(max_rel, o.max_rel);
    max_abs_near_zero = std::max(max_abs_near_zero, o.max_abs_near_zero);
  }
  bool ok(double rel) const { return max_rel < rel && max_abs_near_zero < kNearZero; }
};

// High-order focal values can sit near 1e-10; binary128 keeps the oracle's round-off far below them.
const SeriesOptions kQuadSeries{.steps = 512, .tolerance = 1e-12, .precision = SeriesPrecision::Quad};

int draws_or(const VerifyOptions& opt, int fallback) { return opt.draws.value_or(fallback); }

bool wants(const VerifyOptions& opt, Regime r) { return !opt.regime || *opt.regime == r; }

// Criterion 1 / 2: closed V against the return-map series with the chain imposed stage by stage.
CriterionResult lyapunov_oracle(Regime regime, const VerifyOptions& opt) {
  CriterionResult res;
  res.runtime_limit = 120.0;
  const int n = draws_or(opt, 20);
  const int stages = regime == Regime::Apos ? 5 : 4;
  auto one = [&](int i) {
    OracleError err;
    const int stage = i % stages;
    const int top = 2 * stage + 3;
    const std::uint64_t sd = draw_seed(opt.seed, regime == Regime::Apos ? 1 : 2, static_cast<std::uint64_t>(i));
    LyapunovSpectrum sp;
    ReturnSeries rs;
    if (regime == Regime::Apos) {
      const CanonicalApos c = impose_chain_apos(random_apos(sd), stage);
      sp = closed_v_apos(c);
      rs = numeric_series(canonical_field(c), top, kQuadSeries);
    } else {
      const CanonicalAneg c = impose_chain_aneg(random_aneg(sd), stage);
      sp = closed_v_aneg(c);
      rs = numeric_series(canonical_field(c), top, kQuadSeries);
    }
    for (int k = 3; k <= top; k += 2) err.add(sp.v(k), rs.coeff(k));
    return err;
  };
  const auto errs = batch<OracleError>(n, opt.parallel, one);
  OracleError total;
  for (const auto& e : errs) total.merge(e);
  res.metrics = {{"draws", n}, {"max_rel_err", total.max_rel}, {"max_abs_err_near_zero", total.max_abs_near_zero}};
  res.passed = total.ok(1e-6);

  if (regime == Regime::Aneg) {
    const int n11 = opt.draws ? std::max(1, *opt.draws / 2) : 10;
    struct SignCheck {
      bool match = false;
      double rel = 0.0;
    };
    auto v11 = [&](int i) {
      CanonicalAneg c = random_aneg(draw_seed(opt.seed, 3, static_cast<std::uint64_t>(i)));
      c.eps = 0.01;
      c = impose_chain_aneg(c, 4);
      const LyapunovSpectrum sp = closed_v_aneg(c);
      const ReturnSeries rs = numeric_series(canonical_field(c), 11, kQuadSeries);
      const double u11 = rs.coeff(11);
      SignCheck s;
      s.match = (*sp.v11_sign_surrogate > 0) == (u11 > 0) && u11 != 0.0;
      s.rel = std::abs(sp.v(11) - u11) / std::abs(u11);
      return s;
    };
    const auto checks = batch<SignCheck>(n11, opt.parallel, v11);
    int matches = 0;
    double rel11 = 0.0;
    for (const auto& s : checks) {
      matches += s.match ? 1 : 0;
      rel11 = std::max(rel11, s.rel);
    }
    res.metrics.emplace_back("v11_sign_draws", n11);
    res.metrics.emplace_back("v11_sign_matches", matches);
    res.metrics.emplace_back("v11_closed_max_rel_err", rel11);
    res.passed = res.passed && matches == n11;
  }
  res.summary = "closed V3..V" + std::string(regime == Regime::Apos ? "11" : "9") +
                " vs return-map series: max rel err " + fmt(total.max_rel, 3) + ", max abs err near zero " +
                fmt(total.max_abs_near_zero, 3);
  return res;
}

// Criterion 3: Melnikov closed forms against quadrature.
CriterionResult melnikov_oracle(const VerifyOptions& opt) {
  CriterionResult res;
  const int n = draws_or(opt, 10);
  OracleError apos_err, aneg_err;
  if (wants(opt, Regime::Apos)) {
    auto errs = batch<OracleError>(n, opt.parallel, [&](int i) {
      const CanonicalApos c = random_apos(draw_seed(opt.seed, 4, static_cast<std::uint64_t>(i)));
      const MelnikovResult m = m1_quadrature(c, loop_apos(c.a, c.b));
      OracleError e;
      e.add(m.closed_form, m.orientation_sign * m.quadrature);
      return e;
    });
    for (const auto& e : errs) apos_err.merge(e);
    CanonicalApos d3;
    d3.a = 1.0;
    d3.b = -1.0;
    d3.dk(3) = 1.0;
    const MelnikovResult m = m1_quadrature(d3, loop_apos(1.0, -1.0));
    const double expected = 9240.0 / (13860.0 * std::sqrt(2.0));
    const double d3_err = std::abs(std::abs(m.quadrature) - expected);
    res.metrics.emplace_back("m1_max_rel_err", apos_err.max_rel);
    res.metrics.emplace_back("m1_d3_only_abs", std::abs(m.quadrature));
    res.metrics.emplace_back("m1_d3_only_err", d3_err);
    res.passed = apos_err.ok(1e-6) && d3_err < 1e-8;
  } else {
    res.passed = true;
  }
  if (wants(opt, Regime::Aneg)) {
    auto errs = batch<OracleError>(n, opt.parallel, [&](int i) {
      const CanonicalAneg c = random_aneg(draw_seed(opt.seed, 5, static_cast<std::uint64_t>(i)));
      const MelnikovResult m = m2_quadrature(c, loop_aneg(c.a, c.b));
      OracleError e;
      e.add(m.closed_form, m.orientation_sign * m.quadrature);
      return e;
    });
    for (const auto& e : errs) aneg_err.merge(e);
    res.metrics.emplace_back("m2_max_rel_err", aneg_err.max_rel);
    res.passed = res.passed && aneg_err.ok(1e-6);
  }
  res.metrics.insert(res.metrics.begin(), {"draws", n});
  res.metrics.emplace_back("max_rel_err", std::max(apos_err.max_rel, aneg_err.max_rel));
  res.metrics.emplace_back("m1_orientation_sign", kM1OrientationSign);
  res.metrics.emplace_back("m2_orientation_sign", kM2OrientationSign);
  res.summary = "M1/M2 closed form vs Gauss-Kronrod quadrature after orientation normalization";
  return res;
}

struct Zeroing {
  double m = 0.0, div = 0.0, stab = 0.0, printed_stab = 0.0, printed_flux = 0.0;
  void merge(const Zeroing& o) {
    m = std::max(m, o.m);
    div = std::max(div, o.div);
    stab = std::max(stab, o.stab);
    printed_stab = std::max(printed_stab, o.printed_stab);
    printed_flux = std::max(printed_flux, o.printed_flux);
  }
};

// Criterion 4: the loop functionals zero what they are meant to zero.
CriterionResult phi_zeroing(const VerifyOptions& opt) {
  CriterionResult res;
  const int n = draws_or(opt, 10);
  res.passed = true;
  res.metrics.emplace_back("draws", n);
  if (wants(opt, Regime::Apos)) {
    Zeroing z;
    for (const auto& r : batch<Zeroing>(n, opt.parallel, [&](int i) {
           CanonicalApos c = random_apos(draw_seed(opt.seed, 6, static_cast<std::uint64_t>(i)));
           const LoopGeometry g = loop_apos(c.a, c.b);
           const std::array<double, 2> saddle{c.a / std::sqrt(-2.0 * c.b), 0.0};
           Zeroing out;
           CanonicalApos t = c;
           t.dk(2) = phi1(t);
           out.m = std::abs(m1_quadrature(t, g).quadrature);
           t = impose_loop_surface(c);
           out.div = std::abs(divergence_at(canonical_field(t), saddle));
           t = c;
           t.dk(5) = phi3(t);
           t = impose_loop_surface(t);
           out.stab = std::abs(loop_stability_integral(t, g));
           t = c;
           t.dk(5) = phi3_printed(t);
           t = impose_loop_surface(t);
           out.printed_stab = std::abs(loop_stability_integral(t, g));
           out.printed_flux = std::abs(loop_flux_integral(t, g));
           return out;
         }))
      z.merge(r);
    res.metrics.insert(res.metrics.end(), {{"apos_phi1_m1_max", z.m},
                                           {"apos_phi2_div_max", z.div},
                                           {"apos_phi3_stability_max", z.stab},
                                           {"apos_printed_phi3_stability_max", z.printed_stab},
                                           {"apos_printed_phi3_flux_max", z.printed_flux}});
    res.passed = res.passed && z.m < 1e-10 && z.div < 1e-12 && z.stab < 1e-8;
    if (z.printed_stab >= 1e-8)
      res.findings.push_back("apos: the printed d5 functional leaves the dt stability integral at " +
                             fmt(z.printed_stab, 3) + " but zeroes the dx flux integral (" + fmt(z.printed_flux, 3) +
                             "); the derived functional is used");
  }
  if (wants(opt, Regime::Aneg)) {
    Zeroing z;
    for (const auto& r : batch<Zeroing>(n, opt.parallel, [&](int i) {
           CanonicalAneg c = random_aneg(draw_seed(opt.seed, 7, static_cast<std::uint64_t>(i)));
           const LoopGeometry g = loop_aneg(c.a, c.b);
           const std::array<double, 2> saddle{c.a / std::sqrt(c.b), 0.0};
           Zeroing out;
           CanonicalAneg t = c;
           t.ek(2) = phi1_aneg(t);
           out.m = std::abs(m2_quadrature(t, g).quadrature);
           t = impose_loop_surface(c);
           out.div = std::abs(divergence_at(canonical_field(t), saddle));
           t = c;
           t.ek(5) = phi3_aneg(t);
           t = impose_loop_surface(t);
           out.stab = std::abs(loop_stability_integral(t, g));
           t = c;
           t.ek(5) = phi3_aneg_printed(t);
           t = impose_loop_surface(t);
           out.printed_stab = std::abs(loop_stability_integral(t, g));
           out.printed_flux = std::abs(loop_flux_integral(t, g));
           return out;
         }))
      z.merge(r);
    res.metrics.insert(res.metrics.end(), {{"aneg_phi1_m2_max", z.m},
                                           {"aneg_phi2_div_max", z.div},
                                           {"aneg_phi3_stability_max", z.stab},
                                           {"aneg_printed_phi3_stability_max", z.printed_stab},
                                           {"aneg_printed_phi3_flux_max", z.printed_flux}});
    res.passed = res.passed && z.m < 1e-10 && z.div < 1e-12 && z.stab < 1e-8;
    if (z.printed_stab >= 1e-8)
      res.findings.push_back("aneg: the printed e5 functional leaves the dt stability integral at " +
                             fmt(z.printed_stab, 3) + " but zeroes the dx flux integral (" + fmt(z.printed_flux, 3) +
                             "); the derived functional is used");
  }
  res.summary = "splitting, saddle divergence and loop stability vanish on the loop functionals";
  return res;
}

// Criterion 5: leading eps^2 term of M1 along the nested weak-focus schedule.
CriterionResult leading_splitting_term(const VerifyOptions&) {
  CriterionResult res;
  const double a = 1.0, b = -1.0, d4 = 1.0;
  const PerturbationSchedule sch = schedule_small_apos(5, a, b);
  const LoopGeometry g = loop_apos(a, b);
  auto m1_over_eps2 = [&](double eps) {
    const RealizedSchedule r = realize(sch, eps);
    const MelnikovResult m = m1_quadrature(r.apos(), g);
    return m.orientation_sign * m.quadrature / (eps * eps);
  };
  const double h = 0.01;
  const double f1 = m1_over_eps2(h), f2 = m1_over_eps2(h / 2);
  const double richardson = 2.0 * f2 - f1;
  const double a2 = a * a, a8 = a2 * a2 * a2 * a2, b4 = b * b * b * b;
  const double expected = a8 * d4 * d4 * d4 / (2310.0 * std::sqrt(2.0) * b4);
  const double rel = std::abs(richardson - expected) / std::abs(expected);
  res.metrics = {{"m1_over_eps2_at_0.01", f1},
                 {"m1_over_eps2_at_0.005", f2},
                 {"richardson", richardson},
                 {"expected", expected},
                 {"rel_err", rel},
                 {"m1_orientation_sign", kM1OrientationSign}};
  res.passed = rel < 1e-3;
  res.summary = "M1 / eps^2 extrapolated from eps = 0.01, 0.005 vs a^8 d4^3 / (2310 sqrt(2) b^4)";
  return res;
}

// Criterion 6: canonical forms are conjugate to the physical system.
CriterionResult conjugacy(const VerifyOptions& opt) {
  CriterionResult res;
  const int n = opt.draws.value_or(100);
  res.passed = true;
  res.metrics.emplace_back("draws", n);
  for (Regime r : {Regime::Apos, Regime::Aneg}) {
    if (!wants(opt, r)) continue;
    struct Out {
      double residual = 0.0;
      std::vector<std::string> flagged;
    };
    const auto outs = batch<Out>(n, opt.parallel, [&](int i) {
      const OscParams p = random_params(r, draw_seed(opt.seed, r == Regime::Apos ? 8 : 9, static_cast<std::uint64_t>(i)));
      const ConjugacyReport rep = verify_conjugacy(p, 64, draw_seed(opt.seed, 10, static_cast<std::uint64_t>(i)));
      return Out{rep.max_residual, rep.flagged};
    });
    double worst = 0.0;
    std::vector<std::string> flagged;
    for (const auto& o : outs) {
      worst = std::max(worst, o.residual);
      for (const auto& f : o.flagged)
        if (std::find(flagged.begin(), flagged.end(), f) == flagged.end()) flagged.push_back(f);
    }
    res.metrics.emplace_back(to_string(r) + "_max_residual", worst);
    res.metrics.emplace_back(to_string(r) + "_flagged_count", static_cast<double>(flagged.size()));
    for (const auto& f : flagged) res.findings.push_back(to_string(r) + ": coefficient formula flagged: " + f);
    res.passed = res.passed && worst < 1e-10;
  }
  res.summary = "canonical field vs pushed-forward physical field, relative residual";
  return res;
}

// Criterion 7: the unperturbed center.
CriterionResult center_properties(const VerifyOptions& opt) {
  CriterionResult res;
  CanonicalApos c;
  c.a = 1.0;
  c.b = -1.0;
  c.eps = 0.0;
  const SearchSetup setup = search_setup(Regime::Apos, c.a, c.b);
  const PlanarField f = canonical_field(c);
  IntegratorConfig cfg;
  cfg.escape_box = setup.escape_box;

  const double x0 = 0.5 * setup.loop_extent;
  const ReturnResult rr = poincare_return(f, x0, cfg);
  const Trajectory tr = integrate(f, {x0, 0.0}, 100.0 * rr.period, cfg);
  const double h0 = canonical_hamiltonian(c, x0, 0.0);
  double dh = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) dh = std::max(dh, std::abs(canonical_hamiltonian(c, tr.x[i], tr.y[i]) - h0));

  const std::vector<double> radii = geometric_ladder(1e-3, 0.9 * setup.loop_extent, 10);
  double dmax = 0.0;
  for (double d : scan_displacement(f, radii, cfg, opt.parallel)) dmax = std::max(dmax, std::abs(d));

  // Even return-series coefficients with all lower focal values removed.
  const int n = draws_or(opt, 4);
  const auto evens = batch<double>(n, opt.parallel, [&](int i) {
    double m = 0.0;
    if (i % 2 == 0 || opt.regime == Regime::Apos) {
      const CanonicalApos t = impose_chain_apos(random_apos(draw_seed(opt.seed, 11, static_cast<std::uint64_t>(i))), 4);
      const ReturnSeries rs = numeric_series(canonical_field(t), 10);
      for (int k = 2; k <= 10; k += 2) m = std::max(m, std::abs(rs.coeff(k)));
    } else {
      const CanonicalAneg t = impose_chain_aneg(random_aneg(draw_seed(opt.seed, 12, static_cast<std::uint64_t>(i))), 4);
      const ReturnSeries rs = numeric_series(canonical_field(t), 10);
      for (int k = 2; k <= 10; k += 2) m = std::max(m, std::abs(rs.coeff(k)));
    }
    return m;
  });
  const double even_max = *std::max_element(evens.begin(), evens.end());
  res.metrics = {{"hamiltonian_drift_100_periods", dh},
                 {"period", rr.period},
                 {"max_abs_displacement", dmax},
                 {"even_series_max", even_max}};
  res.passed = dh < 1e-10 && dmax < 1e-9 && even_max < 1e-10;
  res.summary = "eps = 0: energy conserved, zero displacement, even series coefficients vanish";
  return res;
}

LimitCycleReport search_schedule(const RealizedSchedule& r, bool parallel) {
  const CanonicalApos& c = r.apos();
  const SearchSetup setup = search_setup(Regime::Apos, c.a, c.b);
  IntegratorConfig cfg;
  cfg.escape_box = setup.escape_box;
  CycleSearchOptions so;
  so.loop_crossing = setup.loop_crossing;
  so.parallel = parallel;
  return find_cycles(canonical_field(c), setup.interval, 64, cfg, so);
}

// Criterion 8: one small cycle from the s = 1 schedule.
CriterionResult one_cycle(const VerifyOptions& opt) {
  CriterionResult res;
  res.runtime_limit = 60.0;
  const RealizedSchedule r = realize(schedule_small_apos(1, 1.0, -1.0), opt.one_cycle_eps);
  const LimitCycleReport rep = search_schedule(r, opt.parallel);
  std::vector<const CycleInfo*> small;
  for (const auto& cy : rep.cycles)
    if (cy.amplitude_class == AmplitudeClass::Small) small.push_back(&cy);
  const bool one = small.size() == 1;
  const bool bisected = one && small[0]->bracket_hi - small[0]->bracket_lo <= 1e-8;
  const bool unstable = one && small[0]->stability == Stability::Unstable;
  res.metrics = {{"eps", opt.one_cycle_eps},
                 {"cycles_found", static_cast<double>(rep.cycles.size())},
                 {"small_cycles", static_cast<double>(small.size())},
                 {"unresolved_points", static_cast<double>(rep.unresolved.size())}};
  if (one) {
    res.metrics.emplace_back("section_x", small[0]->section_x);
    res.metrics.emplace_back("bracket_width", small[0]->bracket_hi - small[0]->bracket_lo);
    res.metrics.emplace_back("period", small[0]->period);
    res.metrics.emplace_back("slope", small[0]->slope);
    res.metrics.emplace_back("stable", small[0]->stability == Stability::Stable ? 1.0 : 0.0);
    if (!unstable)
      res.findings.push_back(
          "the cycle is " + to_string(small[0]->stability) +
          " in forward time; the claimed Unstable classification holds for the time-reversed flow. The forward "
          "prediction from the V signs is " +
          (r.innermost_forward ? to_string(*r.innermost_forward) : std::string("none")));
  }
  res.passed = one && bisected && unstable;
  res.summary = "s = 1 schedule at eps = " + fmt(opt.one_cycle_eps) + ": " + std::to_string(small.size()) +
                " small cycle(s)" + (one ? ", " + to_string(small[0]->stability) : std::string());
  return res;
}

// Criterion 9: two nested small cycles from the s = 2 schedule.
CriterionResult two_cycles(const VerifyOptions& opt) {
  CriterionResult res;
  const RealizedSchedule r = realize(schedule_small_apos(2, 1.0, -1.0), opt.two_cycle_eps);
  const LimitCycleReport rep = search_schedule(r, opt.parallel);
  std::vector<const CycleInfo*> small;
  for (const auto& cy : rep.cycles)
    if (cy.amplitude_class == AmplitudeClass::Small) small.push_back(&cy);
  bool alternating = small.size() == 2 && small[0]->stability != small[1]->stability;
  bool hyperbolic = true;
  for (const auto* cy : small) hyperbolic = hyperbolic && cy->hyperbolic;
  // Innermost stability must match the forward prediction from the V chain.
  const bool consistent =
      !small.empty() && r.innermost_forward && small[0]->stability == *r.innermost_forward;
  res.metrics = {{"eps", opt.two_cycle_eps},
                 {"small_cycles", static_cast<double>(small.size())},
                 {"unresolved_points", static_cast<double>(rep.unresolved.size())}};
  for (std::size_t i = 0; i < small.size(); ++i) {
    res.metrics.emplace_back("section_x_" + std::to_string(i), small[i]->section_x);
    res.metrics.emplace_back("stable_" + std::to_string(i), small[i]->stability == Stability::Stable ? 1.0 : 0.0);
  }
  res.metrics.emplace_back("innermost_matches_v_prediction", consistent ? 1.0 : 0.0);
  res.passed = small.size() == 2 && alternating && hyperbolic && consistent;
  res.summary = "s = 2 schedule at eps = " + fmt(opt.two_cycle_eps) + ": " + std::to_string(small.size()) +
                " small cycles" + (alternating ? " with alternating stability" : "");
  return res;
}

const char* criterion_name(int id) {
  switch (id) {
    case 1: return "lyapunov oracle (apos)";
    case 2: return "lyapunov oracle (aneg)";
    case 3: return "melnikov closed form vs quadrature";
    case 4: return "loop functional zeroing";
    case 5: return "leading splitting term along the weak-focus schedule";
    case 6: return "canonical conjugacy";
    case 7: return "center and hamiltonian properties";
    case 8: return "one-cycle realization";
    case 9: return "two-cycle realization";
    default: return "";
  }
}

}  // namespace

double CriterionResult::metric(const std::string& key) const {
  for (const auto& [k, v] : metrics)
    if (k == key) return v;
  throw std::out_of_range("CriterionResult: no metric " + key);
}

std::uint64_t draw_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

CanonicalApos random_apos(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  CanonicalApos c;
  c.a = uniform(g, 0.5, 2.0);
  c.b = -uniform(g, 0.5, 2.0);
  for (double& d : c.d) d = uniform(g, -1.0, 1.0);
  c.dk(3) = 0.0;
  c.eps = 0.01;
  return c;
}

CanonicalAneg random_aneg(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  CanonicalAneg c;
  c.a = -uniform(g, 0.5, 2.0);
  c.b = uniform(g, 0.5, 2.0);
  for (double& e : c.e) e = uniform(g, -1.0, 1.0);
  c.ek(3) = 0.0;
  c.eps = 0.01;
  return c;
}

OscParams random_params(Regime regime, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  OscParams p;
  const double a = uniform(g, 0.5, 2.0), b = uniform(g, 0.5, 2.0);
  p.a = regime == Regime::Apos ? a : -a;
  p.b = regime == Regime::Apos ? -b : b;
  for (double& c : p.c) c = uniform(g, -1.0, 1.0);
  p.eps = 0.05;
  return p;
}

SearchSetup search_setup(Regime regime, double a, double b) {
  SearchSetup s;
  if (regime == Regime::Apos) {
    if (!(a > 0.0 && b < 0.0)) throw std::invalid_argument("search_setup: apos requires a > 0, b < 0");
    const double X = a / std::sqrt(-2.0 * b);
    const double ymax = a / (2.0 * std::sqrt(-b));  // loop height at x = 0
    s.loop_extent = X;
    s.loop_crossing = X;
    s.interval = {1e-4, 0.999 * X};
    s.escape_box = {-4 * X, 4 * X, -4 * ymax, 4 * ymax};
  } else {
    if (!(a < 0.0 && b > 0.0)) throw std::invalid_argument("search_setup: aneg requires a < 0, b > 0");
    const double A = -a, sb = std::sqrt(b);
    const double xr = A * (std::sqrt(2.0) - 1.0) / sb;  // right loop crossing of the positive x-axis
    const double xl = -A * (std::sqrt(2.0) + 1.0) / sb;  // far end of the left loop
    const double ymax = A / (2.0 * sb);                   // max |y| on the loops
    s.loop_extent = std::max(std::abs(xl), xr);
    s.loop_crossing = xr;
    s.interval = {1e-4, 0.999 * xr};
    s.escape_box = {4 * xl, 4 * std::max(xr, A / sb), -4 * ymax, 4 * ymax};
  }
  return s;
}

std::vector<int> default_criteria(const std::optional<Regime>& regime) {
  if (!regime) return {1, 2, 3, 4, 5, 6, 7, 8, 9};
  if (*regime == Regime::Apos) return {1, 3, 4, 5, 6, 7};
  return {2, 3, 4, 6, 7};
}

CriterionResult run_criterion(int id, const VerifyOptions& opt) {
  const Timer t;
  CriterionResult r;
  switch (id) {
    case 1: r = lyapunov_oracle(Regime::Apos, opt); break;
    case 2: r = lyapunov_oracle(Regime::Aneg, opt); break;
    case 3: r = melnikov_oracle(opt); break;
    case 4: r = phi_zeroing(opt); break;
    case 5: r = leading_splitting_term(opt); break;
    case 6: r = conjugacy(opt); break;
    case 7: r = center_properties(opt); break;
    case 8: r = one_cycle(opt); break;
    case 9: r = two_cycles(opt); break;
    default: throw std::invalid_argument("run_criterion: unknown criterion " + std::to_string(id));
  }
  r.id = id;
  r.name = criterion_name(id);
  r.seconds = t.seconds();
  if (r.runtime_limit > 0.0 && r.seconds > r.runtime_limit) {
    r.passed = false;
    r.findings.push_back("runtime " + fmt(r.seconds, 3) + " s exceeds the " + fmt(r.runtime_limit) + " s limit");
  }
  return r;
}

std::vector<CriterionResult> run_suite(const VerifyOptions& opt) {
  const std::vector<int> ids = opt.criteria.empty() ? default_criteria(opt.regime) : opt.criteria;
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, opt));
  return out;
}

}  // namespace cycleforge
