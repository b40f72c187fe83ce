#include "cycleforge/simulate.hpp"

#include <omp.h>

#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace cycleforge {

namespace odeint = boost::numeric::odeint;

namespace {

using real = long double;
using State = std::array<real, 4>;  // x, y, accumulated energy change, its absolute variation

struct Term {
  int i, j;
  real c;
};

std::vector<Term> to_terms(const Poly2& p) {
  std::vector<Term> out;
  for (const auto& t : p.terms()) out.push_back({t.i, t.j, static_cast<real>(t.coeff)});
  return out;
}

real eval(const std::vector<Term>& ts, const std::array<real, kMaxDegree + 1>& xp,
          const std::array<real, kMaxDegree + 1>& yp) {
  real s = 0;
  for (const auto& t : ts) s += t.c * xp[t.i] * yp[t.j];
  return s;
}

// Field split as xdot = F1, ydot = g(x) + p(x, y) with energy rate y * p.
struct FastField {
  std::vector<Term> f1, f2, g, p;
  bool energy_split = false;

  explicit FastField(const PlanarField& f) : f1(to_terms(f.f1)), f2(to_terms(f.f2)) {
    const auto t1 = f.f1.terms();
    energy_split = t1.size() == 1 && t1[0].i == 0 && t1[0].j == 1 && t1[0].coeff == 1.0;
    for (const auto& t : f2) (t.j == 0 ? g : p).push_back(t);
  }

  void powers(real x, real y, std::array<real, kMaxDegree + 1>& xp, std::array<real, kMaxDegree + 1>& yp) const {
    xp[0] = yp[0] = 1;
    for (int k = 1; k <= kMaxDegree; ++k) {
      xp[k] = xp[k - 1] * x;
      yp[k] = yp[k - 1] * y;
    }
  }

  // d/dt (x, y, E)
  void operator()(const State& s, State& ds, real /*t*/) const {
    std::array<real, kMaxDegree + 1> xp, yp;
    powers(s[0], s[1], xp, yp);
    ds[0] = eval(f1, xp, yp);
    const real pv = eval(p, xp, yp);
    ds[1] = eval(g, xp, yp) + pv;
    ds[2] = energy_split ? s[1] * pv : real(0);
    ds[3] = std::abs(ds[2]);
  }
};

// Cheap-to-copy handle; odeint passes systems by value.
struct Rhs {
  const FastField* ff;
  void operator()(const State& s, State& ds, real t) const { (*ff)(s, ds, t); }
};

// Positions scaled by the start amplitude L so that tolerances act relative to the orbit size.
struct ScaledRhs {
  const FastField* ff;
  real L;
  void operator()(const State& s, State& ds, real t) const {
    const State u{s[0] * L, s[1] * L, s[2], s[3]};
    (*ff)(u, ds, t);
    ds[0] /= L;
    ds[1] /= L;
  }
};

// Scaled field with Y = y / L as the independent variable: z = (X, t, E).
struct SectionSystem {
  const FastField* ff;
  real L;
  void operator()(const State& z, State& dz, real Y) const {
    std::array<real, kMaxDegree + 1> xp, yp;
    const real y = Y * L;
    ff->powers(z[0] * L, y, xp, yp);
    const real fx = eval(ff->f1, xp, yp);
    const real pv = eval(ff->p, xp, yp);
    const real fy = eval(ff->g, xp, yp) + pv;
    dz[0] = fx / fy;
    dz[1] = L / fy;
    dz[2] = ff->energy_split ? L * y * pv / fy : real(0);
    dz[3] = std::abs(dz[2]);
  }
};

// Solves G(x0 + delta) - G(x0) = dE for delta, where G' = -g.
real energy_displacement(const FastField& ff, real x0, real dE, real guess) {
  std::array<real, kMaxDegree + 2> G{};  // G(x) = sum G[k] x^k
  for (const auto& t : ff.g) G[t.i + 1] -= t.c / (t.i + 1);
  // Taylor coefficients about x0.
  std::array<real, kMaxDegree + 2> T{};
  for (int k = 1; k <= kMaxDegree + 1; ++k) {
    real binom = 1;
    for (int m = 0; m <= k; ++m) {
      if (m > 0) binom = binom * (k - m + 1) / m;
      if (m >= 1) T[m] += G[k] * binom * std::pow(x0, static_cast<real>(k - m));
    }
  }
  real d = guess;
  for (int it = 0; it < 60; ++it) {
    real v = 0, dv = 0;  // v(d) = sum_{m>=1} T[m] d^m - dE
    for (int m = kMaxDegree + 1; m >= 0; --m) {
      dv = dv * d + v;
      v = v * d + (m >= 1 ? T[m] : -dE);
    }
    const real step = v / dv;
    d -= step;
    if (std::abs(step) <= std::numeric_limits<real>::epsilon() * std::abs(d) || step == 0) break;
  }
  return d;
}

// Positions under the usual mixed tolerance; the energy balance, which is tiny next to the
// state, under its own absolute bound. The variation component is not controlled.
struct ReturnErrorChecker {
  real eps_abs, eps_rel, eps_energy;

  template <class Algebra>
  real error(Algebra&, const State& x, const State& dxdt, State& err, real dt) const {
    real m = 0;
    for (int i = 0; i < 2; ++i)
      m = std::max(m, std::abs(err[i]) / (eps_abs + eps_rel * (std::abs(x[i]) + std::abs(dt) * std::abs(dxdt[i]))));
    return std::max(m, std::abs(err[2]) / eps_energy);
  }
};

template <class Stepper>
using ReturnController = odeint::controlled_runge_kutta<Stepper, ReturnErrorChecker>;

// Largest |y p(x, y)| on the circle of radius L, floored to stay positive.
real energy_rate_scale(const FastField& ff, real L) {
  real m = 0;
  std::array<real, kMaxDegree + 1> xp, yp;
  for (int k = 0; k < 16; ++k) {
    const real th = 2 * static_cast<real>(M_PI) * k / 16;
    const real x = L * std::cos(th), y = L * std::sin(th);
    ff.powers(x, y, xp, yp);
    m = std::max(m, std::abs(y * eval(ff.p, xp, yp)));
  }
  return m > 0 ? m : 1;
}

template <class Controlled>
ReturnResult run_return(Controlled ctrl, const FastField& ff, double x0, const IntegratorConfig& cfg) {
  const real L = x0;
  const ScaledRhs rhs{&ff, L};
  State s{1, 0, 0, 0};
  real t = 0;
  real dt = std::min<real>(cfg.max_step, 0.01L);
  ReturnResult res;
  res.x_min = res.x_max = x0;
  res.energy_split = ff.energy_split;
  int events = 0;
  for (long n = 0; n < cfg.max_steps; ++n) {
    const State prev = s;
    const real tprev = t;
    dt = std::min<real>(dt, cfg.max_step);
    if (ctrl.try_step(rhs, s, t, dt) == odeint::fail) {
      if (!(dt > 1e-300L) || t + dt == t) throw IntegrationError("poincare_return: step size underflow");
      continue;
    }
    const double x = static_cast<double>(s[0] * L), y = static_cast<double>(s[1] * L);
    if (!std::isfinite(x) || !std::isfinite(y)) throw IntegrationError("poincare_return: non-finite state");
    if (!cfg.escape_box.contains(x, y))
      throw EscapeError("poincare_return: orbit from x0=" + std::to_string(x0) + " left the escape box");
    res.x_min = std::min(res.x_min, x);
    res.x_max = std::max(res.x_max, x);
    if (prev[1] > 0 && s[1] <= 0 && s[0] > 0) {
      // Land on y = 0 exactly with two steps in y (Henon's method).
      const SectionSystem sec{&ff, L};
      odeint::runge_kutta_fehlberg78<State, real, State, real> rk;
      State z{prev[0], tprev, prev[2], prev[3]};
      real Y = prev[1];
      const real hy = -prev[1] / 2;
      for (int k = 0; k < 2; ++k) {
        rk.do_step(sec, z, Y, hy);
        Y += hy;
      }
      if (++events >= cfg.max_events) {
        res.period = static_cast<double>(z[1]);
        real delta = (z[0] - 1) * L;
        if (ff.energy_split) {
          delta = energy_displacement(ff, L, z[2], delta);
          // Quadrature error scales with the variation of the energy integrand; dH/dx = -g(x).
          std::array<real, kMaxDegree + 1> xp, yp;
          ff.powers(L, 0, xp, yp);
          const real gx = std::abs(eval(ff.g, xp, yp));
          res.noise = static_cast<double>(cfg.energy_tol * z[3] / std::max(gx, std::numeric_limits<real>::min()));
        } else {
          res.noise = cfg.rel_tol * x0;
        }
        res.displacement = static_cast<double>(delta);
        res.h = static_cast<double>(L + delta);
        return res;
      }
      s = State{z[0], 0, z[2], z[3]};
      t = z[1];
    }
  }
  throw IntegrationError("poincare_return: max_steps exceeded without a section crossing");
}

}  // namespace

void IntegratorConfig::validate() const {
  auto in_range = [](double v) { return v >= 1e-14 && v <= 1e-6; };
  if (!in_range(rel_tol) || !in_range(abs_tol))
    throw std::invalid_argument("IntegratorConfig: tolerances must lie in [1e-14, 1e-6]");
  if (!(energy_tol >= 1e-19 && energy_tol <= 1e-6))
    throw std::invalid_argument("IntegratorConfig: energy_tol must lie in [1e-19, 1e-6]");
  if (order != 5 && order != 8) throw std::invalid_argument("IntegratorConfig: order must be 5 or 8");
  if (!(max_step > 0.0)) throw std::invalid_argument("IntegratorConfig: max_step must be positive");
  if (max_events < 1) throw std::invalid_argument("IntegratorConfig: max_events must be >= 1");
}

std::string to_string(Stability s) { return s == Stability::Stable ? "stable" : "unstable"; }
std::string to_string(AmplitudeClass a) { return a == AmplitudeClass::Small ? "small" : "large"; }

Trajectory integrate(const PlanarField& f, std::array<double, 2> x0, double t_span, const IntegratorConfig& cfg,
                     double sample_dt) {
  cfg.validate();
  if (!(t_span > 0.0)) throw std::invalid_argument("integrate: t_span must be positive");
  const FastField ff(f);
  Trajectory tr;
  State s{x0[0], x0[1], 0};
  auto observe = [&](const State& st, real t) {
    if (!cfg.escape_box.contains(static_cast<double>(st[0]), static_cast<double>(st[1])))
      throw EscapeError("integrate: trajectory left the escape box");
    tr.t.push_back(static_cast<double>(t));
    tr.x.push_back(static_cast<double>(st[0]));
    tr.y.push_back(static_cast<double>(st[1]));
  };
  const real rel = cfg.rel_tol, abs = cfg.abs_tol, hmax = cfg.max_step;
  if (cfg.order == 5) {
    auto dense = odeint::make_dense_output(abs, rel, hmax, odeint::runge_kutta_dopri5<State, real, State, real>());
    if (sample_dt > 0.0)
      odeint::integrate_const(dense, Rhs{&ff}, s, real(0), static_cast<real>(t_span), static_cast<real>(sample_dt), observe);
    else
      odeint::integrate_adaptive(dense, Rhs{&ff}, s, real(0), static_cast<real>(t_span), real(0.01), observe);
  } else {
    auto ctrl = odeint::make_controlled(abs, rel, hmax, odeint::runge_kutta_fehlberg78<State, real, State, real>());
    odeint::integrate_adaptive(ctrl, Rhs{&ff}, s, real(0), static_cast<real>(t_span), real(0.01), observe);
  }
  return tr;
}

ReturnResult poincare_return(const PlanarField& f, double x0, const IntegratorConfig& cfg) {
  cfg.validate();
  if (!(x0 > 0.0)) throw std::invalid_argument("poincare_return: x0 must be positive");
  const FastField ff(f);
  const ReturnErrorChecker checker{cfg.abs_tol, cfg.rel_tol,
                                   static_cast<real>(cfg.energy_tol) * energy_rate_scale(ff, x0)};
  const odeint::default_step_adjuster<real, real> adjuster(cfg.max_step);
  using Dopri = odeint::runge_kutta_dopri5<State, real, State, real>;
  using Fehlberg = odeint::runge_kutta_fehlberg78<State, real, State, real>;
  if (cfg.order == 5) return run_return(ReturnController<Dopri>(checker, adjuster), ff, x0, cfg);
  return run_return(ReturnController<Fehlberg>(checker, adjuster), ff, x0, cfg);
}

std::vector<double> geometric_ladder(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw std::invalid_argument("geometric_ladder: need 0 < lo < hi, n >= 2");
  std::vector<double> xs(static_cast<std::size_t>(n));
  const double r = std::log(hi / lo) / (n - 1);
  for (int k = 0; k < n; ++k) xs[static_cast<std::size_t>(k)] = lo * std::exp(r * k);
  xs.back() = hi;
  return xs;
}

int configured_threads() {
  if (const char* env = std::getenv("CYCLEFORGE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v >= 1) return static_cast<int>(v);
  }
  return omp_get_max_threads();
}

std::vector<ReturnResult> scan_returns(const PlanarField& f, const std::vector<double>& xs,
                                      const IntegratorConfig& cfg, bool parallel) {
  const auto n = static_cast<long>(xs.size());
  ReturnResult escaped;
  escaped.h = escaped.displacement = escaped.noise = std::numeric_limits<double>::quiet_NaN();
  std::vector<ReturnResult> out(xs.size(), escaped);
  std::vector<std::string> failure(xs.size());
  auto one = [&](long k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      out[i] = poincare_return(f, xs[i], cfg);
    } catch (const EscapeError&) {
      // left as NaN
    } catch (const std::exception& e) {
      failure[i] = e.what();
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(dynamic) num_threads(configured_threads())
    for (long k = 0; k < n; ++k) one(k);
  } else {
    for (long k = 0; k < n; ++k) one(k);
  }
  for (const auto& msg : failure)
    if (!msg.empty()) throw IntegrationError(msg);
  return out;
}

std::vector<double> scan_displacement(const PlanarField& f, const std::vector<double>& xs, const IntegratorConfig& cfg,
                                      bool parallel) {
  std::vector<double> d;
  for (const auto& r : scan_returns(f, xs, cfg, parallel)) d.push_back(r.displacement);
  return d;
}

LimitCycleReport find_cycles(const PlanarField& f, std::pair<double, double> interval, int n_scan,
                             const IntegratorConfig& cfg, const CycleSearchOptions& opt) {
  cfg.validate();
  if (n_scan < 8) throw std::invalid_argument("find_cycles: n_scan must be >= 8");
  LimitCycleReport rep;
  rep.search_interval = interval;
  const auto xs = geometric_ladder(interval.first, interval.second, n_scan);
  const auto rs = scan_returns(f, xs, cfg, opt.parallel);
  std::vector<double> ds;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    ds.push_back(rs[k].displacement);
    rep.displacement_samples.emplace_back(xs[k], ds[k]);
    if (std::isnan(ds[k])) rep.escaped.push_back(xs[k]);
  }
  auto floor_of = [&](const ReturnResult& r) { return std::max(opt.noise_floor, opt.noise_factor * r.noise); };
  auto resolved = [&](std::size_t k) {
    return std::isfinite(ds[k]) && std::abs(ds[k]) > floor_of(rs[k]);
  };

  for (std::size_t k = 0; k < xs.size(); ++k)
    if (std::isfinite(ds[k]) && !resolved(k)) rep.unresolved.push_back(xs[k]);
  for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
    if (!resolved(k) || !resolved(k + 1)) continue;
    if ((ds[k] > 0) == (ds[k + 1] > 0)) continue;
    double lo = xs[k], hi = xs[k + 1];
    const bool lo_positive = ds[k] > 0;
    while (hi - lo > opt.locator_tol) {
      const double mid = 0.5 * (lo + hi);
      const double dm = poincare_return(f, mid, cfg).displacement;
      if ((dm > 0) == lo_positive)
        lo = mid;
      else
        hi = mid;
    }
    CycleInfo c;
    c.bracket_lo = lo;
    c.bracket_hi = hi;
    c.section_x = 0.5 * (lo + hi);
    // Orbits inside move out and orbits outside move in: attracting.
    c.stability = lo_positive ? Stability::Stable : Stability::Unstable;
    const ReturnResult r = poincare_return(f, c.section_x, cfg);
    c.period = r.period;
    // Simple root: the displacement difference across the root clears the noise with the expected sign.
    const double h = std::min({opt.slope_step * c.section_x, 0.5 * (c.section_x - xs[k]), 0.5 * (xs[k + 1] - c.section_x)});
    const double hstep = std::max(h, 10.0 * opt.locator_tol);
    const ReturnResult rp = poincare_return(f, c.section_x + hstep, cfg);
    const ReturnResult rm = poincare_return(f, c.section_x - hstep, cfg);
    c.slope = (rp.displacement - rm.displacement) / (2.0 * hstep);
    const bool sign_ok = lo_positive ? c.slope < 0 : c.slope > 0;
    c.hyperbolic = sign_ok && std::abs(rp.displacement - rm.displacement) > floor_of(rp) + floor_of(rm);
    // Loop-born cycles hug the loop, focus-born ones sit well inside it.
    c.amplitude_class = opt.loop_crossing && c.section_x >= opt.large_fraction * *opt.loop_crossing
                            ? AmplitudeClass::Large
                            : AmplitudeClass::Small;
    if (!c.hyperbolic) rep.unresolved.push_back(c.section_x);
    rep.cycles.push_back(c);
  }
  return rep;
}

}  // namespace cycleforge
