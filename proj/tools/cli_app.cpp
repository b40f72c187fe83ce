#include "cli_app.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "cycleforge/bautin.hpp"
#include "cycleforge/lyapunov.hpp"
#include "cycleforge/melnikov.hpp"
#include "cycleforge/simulate.hpp"
#include "cycleforge/verify.hpp"

namespace cycleforge::cli {

using nlohmann::json;

namespace {

double number_field(const json& j, const std::string& key) {
  if (!j.contains(key)) throw InputError(key, "missing");
  if (!j.at(key).is_number()) throw InputError(key, "expected a number");
  const double v = j.at(key).get<double>();
  if (!std::isfinite(v)) throw InputError(key, "must be finite");
  return v;
}

// Coefficients given either as an array under `prefix` or as prefix1..prefixN keys (absent keys are zero).
template <std::size_t N>
std::optional<std::array<double, N>> coefficient_block(const json& j, const std::string& prefix) {
  bool any_indexed = false;
  for (std::size_t k = 1; k <= N; ++k) any_indexed = any_indexed || j.contains(prefix + std::to_string(k));
  if (!j.contains(prefix) && !any_indexed) return std::nullopt;
  if (j.contains(prefix) && any_indexed) throw InputError(prefix, "given both as an array and as indexed keys");
  std::array<double, N> out{};
  if (j.contains(prefix)) {
    const json& arr = j.at(prefix);
    if (!arr.is_array() || arr.size() != N)
      throw InputError(prefix, "expected an array of " + std::to_string(N) + " numbers");
    for (std::size_t k = 0; k < N; ++k) {
      if (!arr[k].is_number()) throw InputError(prefix + std::to_string(k + 1), "expected a number");
      out[k] = arr[k].get<double>();
      if (!std::isfinite(out[k])) throw InputError(prefix + std::to_string(k + 1), "must be finite");
    }
  } else {
    for (std::size_t k = 1; k <= N; ++k)
      if (j.contains(prefix + std::to_string(k))) out[k - 1] = number_field(j, prefix + std::to_string(k));
  }
  return out;
}

json orientation_json() { return {{"m1", kM1OrientationSign}, {"m2", kM2OrientationSign}}; }

json report_header(const std::string& subcommand) {
  json r;
  r["schema_version"] = kSchemaVersion;
  r["subcommand"] = subcommand;
  r["orientation_signs"] = orientation_json();
  return r;
}

Regime parse_regime(const std::string& s) {
  if (s == "apos") return Regime::Apos;
  if (s == "aneg") return Regime::Aneg;
  throw InputError("regime", "expected apos or aneg, got '" + s + "'");
}

Regime regime_of(const ParamSet& p) {
  if (std::holds_alternative<CanonicalApos>(p)) return Regime::Apos;
  if (std::holds_alternative<CanonicalAneg>(p)) return Regime::Aneg;
  return std::get<OscParams>(p).a > 0.0 ? Regime::Apos : Regime::Aneg;
}

// Canonical form of any parameter set; physical parameters are transformed.
std::variant<CanonicalApos, CanonicalAneg> canonical_of(const ParamSet& p) {
  if (const auto* c = std::get_if<CanonicalApos>(&p)) return *c;
  if (const auto* c = std::get_if<CanonicalAneg>(&p)) return *c;
  const OscParams& o = std::get<OscParams>(p);
  if (o.a > 0.0) return to_canonical_apos(o);
  return to_canonical_aneg(o);
}

json canonical_json(const std::variant<CanonicalApos, CanonicalAneg>& c) {
  return std::visit([](const auto& v) { return to_json(ParamSet{v}); }, c);
}

void check_regime(const std::optional<std::string>& flag, const ParamSet& p) {
  if (!flag) return;
  if (parse_regime(*flag) != regime_of(p))
    throw InputError("regime", "--regime " + *flag + " does not match the parameter signs (" +
                                   to_string(regime_of(p)) + ")");
}

void emit(const json& report, const std::string& out_path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw InputError("out", "cannot open '" + out_path + "' for writing");
  f << text;
}

// Settings file: flat object keyed by long flag names; values fill flags not given on the command line.
void apply_settings(CLI::App* sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("config-file", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InputError("config-file", std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config-file", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "config-file") throw InputError(key, "settings files cannot nest");
    CLI::Option* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr) throw InputError(key, "unknown setting for '" + sub->get_name() + "'");
    if (opt->count() > 0) continue;  // flags win
    std::string text;
    if (value.is_string()) {
      text = value.get<std::string>();
    } else if (value.is_boolean()) {
      text = value.get<bool>() ? "true" : "false";
    } else if (value.is_number()) {
      text = value.dump();
    } else if (value.is_array()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        if (!value[i].is_number() && !value[i].is_string()) throw InputError(key, "expected scalars in the array");
        text += (i ? "," : "") + (value[i].is_string() ? value[i].get<std::string>() : value[i].dump());
      }
    } else {
      throw InputError(key, "unsupported value type");
    }
    try {
      opt->add_result(text);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw InputError(key, e.what());
    }
  }
}

// Relative error where the reference is resolvable, absolute error near zero.
struct ErrorTally {
  double max_rel = 0.0;
  double max_abs_near_zero = 0.0;
  void add(double ref, double got) {
    const double diff = std::abs(ref - got);
    if (std::abs(ref) < 1e-10)
      max_abs_near_zero = std::max(max_abs_near_zero, diff);
    else
      max_rel = std::max(max_rel, diff / std::abs(ref));
  }
};

// ---------------------------------------------------------------- canonical

struct CanonicalArgs {
  std::string params, out;
  int samples = 64;
  std::uint64_t seed = 1;
};

int cmd_canonical(const CanonicalArgs& a, std::ostream& out) {
  if (a.params.empty()) throw InputError("params", "missing --params");
  if (a.samples < 1) throw InputError("samples", "must be positive");
  const ParamSet p = load_params(a.params);
  const auto* o = std::get_if<OscParams>(&p);
  if (o == nullptr) throw InputError("params", "expected physical parameters (c or c1..c6)");
  try {
    o->validate();
  } catch (const std::invalid_argument& e) {
    throw InputError("params", e.what());
  }
  const Regime regime = regime_of(p);
  const auto canon = canonical_of(p);
  const ConjugacyReport cr = verify_conjugacy(*o, a.samples, a.seed);

  json r = report_header("canonical");
  r["regime"] = to_string(regime);
  r["params"] = to_json(p);
  r["canonical"] = canonical_json(canon);
  json eq = json::array();
  OscParams unperturbed = *o;
  unperturbed.eps = 0.0;
  for (const auto& e : equilibria(unperturbed))
    eq.push_back({{"position", e.position}, {"kind", to_string(e.kind)}});
  r["equilibria"] = eq;
  json coeffs = json::object();
  for (std::size_t i = 0; i < cr.coefficient_names.size(); ++i) coeffs[cr.coefficient_names[i]] = cr.coefficient_rel_err[i];
  r["conjugacy"] = {{"samples", cr.n_samples},
                    {"seed", a.seed},
                    {"max_residual", cr.max_residual},
                    {"coefficient_rel_err", coeffs},
                    {"flagged", cr.flagged}};
  const bool ok = cr.max_residual < 1e-10 && cr.flagged.empty();
  r["passed"] = ok;
  emit(r, a.out, out);
  return ok ? kExitOk : kExitVerifyFailure;
}

// ---------------------------------------------------------------- lyapunov

struct LyapunovArgs {
  std::string params, out, precision = "quad";
  std::optional<std::string> regime;
  int stage = 0;
  int steps = 512;
  bool zero_trace = false;
};

int cmd_lyapunov(const LyapunovArgs& a, std::ostream& out) {
  if (a.params.empty()) throw InputError("params", "missing --params");
  const ParamSet p = load_params(a.params);
  check_regime(a.regime, p);
  if (a.precision != "quad" && a.precision != "extended") throw InputError("precision", "expected quad or extended");
  SeriesOptions so;
  so.steps = a.steps;
  so.precision = a.precision == "quad" ? SeriesPrecision::Quad : SeriesPrecision::Extended;
  if (a.steps < 8) throw InputError("steps", "must be >= 8");

  auto canon = canonical_of(p);
  LyapunovSpectrum sp;
  PlanarField field;
  try {
    if (auto* c = std::get_if<CanonicalApos>(&canon)) {
      if (a.stage < 0 || a.stage > 4) throw InputError("stage", "must be in 0..4");
      if (a.zero_trace) c->dk(3) = 0.0;
      *c = impose_chain_apos(*c, a.stage);
      if (c->dk(3) != 0.0) throw InputError("d3", "closed focal values require a zero trace term (see --zero-trace)");
      sp = closed_v_apos(*c);
      field = canonical_field(*c);
    } else {
      auto& e = std::get<CanonicalAneg>(canon);
      if (a.stage < 0 || a.stage > 4) throw InputError("stage", "must be in 0..4");
      if (a.zero_trace) e.ek(3) = 0.0;
      e = impose_chain_aneg(e, a.stage);
      if (e.ek(3) != 0.0) throw InputError("e3", "closed focal values require a zero trace term (see --zero-trace)");
      sp = closed_v_aneg(e);
      field = canonical_field(e);
    }
  } catch (const std::invalid_argument& e) {
    throw InputError("params", e.what());
  }
  const ReturnSeries rs = numeric_series(field, 11, so);

  json closed = json::array(), numeric = json::array();
  ErrorTally tally;
  int compared = 0;
  for (const auto& en : sp.entries) {
    const int idx = 2 * en.order + 1;
    const double num = idx == 1 ? rs.coeff(1) - 1.0 : rs.coeff(idx);
    closed.push_back({{"name", "V" + std::to_string(idx)}, {"value", idx == 1 ? 0.0 : en.value}, {"valid", en.valid}});
    numeric.push_back({{"name", "u" + std::to_string(idx)}, {"value", num}});
    if (idx > 1 && en.valid) {
      tally.add(en.value, num);
      ++compared;
    }
  }
  json r = report_header("lyapunov");
  r["regime"] = to_string(regime_of(p));
  r["params"] = to_json(p);
  r["canonical"] = canonical_json(canon);
  r["stage"] = a.stage;
  r["zero_trace"] = a.zero_trace;
  r["series"] = {{"steps", a.steps}, {"precision", a.precision}, {"error_estimate", rs.error_estimate}};
  r["gate_tolerance"] = sp.gate_tolerance;
  if (sp.v11_sign_surrogate) r["v11_sign_surrogate"] = *sp.v11_sign_surrogate;
  r["first_nonzero"] = sp.first_nonzero();
  r["closed"] = closed;
  r["numeric"] = numeric;
  r["compared"] = compared;
  r["max_rel_err"] = tally.max_rel;
  r["max_abs_err_near_zero"] = tally.max_abs_near_zero;
  const bool ok = tally.max_rel < 1e-6 && tally.max_abs_near_zero < 1e-10;
  r["passed"] = ok;
  emit(r, a.out, out);
  return ok ? kExitOk : kExitVerifyFailure;
}

// ---------------------------------------------------------------- melnikov

struct MelnikovArgs {
  std::optional<std::string> regime;
  std::string params, out;
};

template <class F>
json maybe(F&& f) {
  try {
    return f();
  } catch (const std::domain_error&) {
    return nullptr;
  }
}

int cmd_melnikov(const MelnikovArgs& a, std::ostream& out) {
  if (!a.regime) throw InputError("regime", "missing --regime");
  const Regime regime = parse_regime(*a.regime);
  if (a.params.empty()) throw InputError("params", "missing --params");
  const ParamSet p = load_params(a.params);
  check_regime(a.regime, p);
  const auto canon = canonical_of(p);

  json r = report_header("melnikov");
  r["regime"] = to_string(regime);
  r["params"] = to_json(p);
  r["canonical"] = canonical_json(canon);
  MelnikovResult m;
  json phi;
  if (regime == Regime::Apos) {
    const CanonicalApos& c = std::get<CanonicalApos>(canon);
    const LoopGeometry g = loop_apos(c.a, c.b);
    m = m1_quadrature(c, g);
    const CanonicalApos s = impose_loop_surface(c);
    phi = {{"phi1", phi1(c)},
           {"phi2", phi2(c)},
           {"phi3", phi3(c)},
           {"phi3_printed", phi3_printed(c)},
           {"div_p2", div_p2(c)}};
    r["function"] = "M1";
    r["loop"] = {{"kind", to_string(g.kind)}, {"level", g.level}, {"extent", g.extent}, {"max_residual", g.max_residual}};
    r["surface"] = {{"stability_integral", maybe([&] { return json(loop_stability_integral(s, g)); })},
                    {"flux_integral", maybe([&] { return json(loop_flux_integral(s, g)); })}};
  } else {
    const CanonicalAneg& c = std::get<CanonicalAneg>(canon);
    const LoopGeometry g = loop_aneg(c.a, c.b);
    m = m2_quadrature(c, g);
    const CanonicalAneg s = impose_loop_surface(c);
    phi = {{"phi1", phi1_aneg(c)},
           {"phi2", phi2_aneg(c)},
           {"phi3", maybe([&] { return json(phi3_aneg(c)); })},
           {"phi3_printed", phi3_aneg_printed(c)},
           {"div_q1", div_q1(c)}};
    r["function"] = "M2";
    r["loop"] = {{"kind", to_string(g.kind)}, {"level", g.level}, {"extent", g.extent}, {"max_residual", g.max_residual}};
    r["surface"] = {{"stability_integral", maybe([&] { return json(loop_stability_integral(s, g)); })},
                    {"flux_integral", maybe([&] { return json(loop_flux_integral(s, g)); })}};
  }
  const double err = std::abs(m.closed_form - m.orientation_sign * m.quadrature);
  const double scale = std::max(1.0, std::abs(m.closed_form));
  const bool ok = err <= 1e-8 * scale;
  r["closed"] = m.closed_form;
  r["quadrature"] = m.quadrature;
  r["quadrature_error_estimate"] = m.abs_error_estimate;
  r["error"] = err;
  r["orientation_sign"] = m.orientation_sign;
  r["phi_values"] = phi;
  r["passed"] = ok;
  emit(r, a.out, out);
  return ok ? kExitOk : kExitVerifyFailure;
}

// ---------------------------------------------------------------- schedule

struct ScheduleArgs {
  std::optional<std::string> regime;
  std::string config, out;
  double eps = 0.01;
  double a = std::numeric_limits<double>::quiet_NaN(), b = std::numeric_limits<double>::quiet_NaN();
};

json schedule_json(const PerturbationSchedule& sch) {
  json as = json::array();
  for (const auto& p : sch.assignments) as.push_back({{"name", p.name}, {"eps_coefficients", p.coeffs}});
  json sc = json::array();
  for (const auto& c : sch.sign_constraints)
    sc.push_back({{"name", c.name},
                  {"sign", c.sign},
                  {"value", c.value},
                  {"threshold", c.threshold},
                  {"satisfied", c.satisfied()}});
  json co = json::object();
  for (const auto& [k, v] : sch.coefficients) co[k] = v;
  return {{"assignments", as}, {"sign_constraints", sc}, {"coefficients", co}, {"provenance", sch.provenance},
          {"notes", sch.notes}};
}

json config_json(const Configuration& c) { return {{"s", c.s}, {"m", c.m}, {"k", c.k}}; }

int cmd_schedule(const ScheduleArgs& a, std::ostream& out) {
  if (!a.regime) throw InputError("regime", "missing --regime");
  const Regime regime = parse_regime(*a.regime);
  if (a.config.empty()) throw InputError("config", "missing --config (s,m[,k])");
  const std::vector<int> cfg = parse_int_list(a.config, "config");
  if (cfg.size() < 2 || cfg.size() > 3) throw InputError("config", "expected s,m or s,m,k");
  const int s = cfg[0], m = cfg[1], k = cfg.size() == 3 ? cfg[2] : 0;
  if (regime == Regime::Apos && k != 0) throw InputError("config", "the loop-break count k applies to aneg only");
  if (!(std::abs(a.eps) > 0.0 && std::abs(a.eps) <= 0.1)) throw InputError("eps", "must satisfy 0 < |eps| <= 0.1");
  const double pa = std::isnan(a.a) ? (regime == Regime::Apos ? 1.0 : -1.0) : a.a;
  const double pb = std::isnan(a.b) ? (regime == Regime::Apos ? -1.0 : 1.0) : a.b;

  PerturbationSchedule sch;
  try {
    if (regime == Regime::Apos)
      sch = m == 0 ? schedule_small_apos(s, pa, pb) : schedule_mixed_apos(s, m, pa, pb);
    else
      sch = m == 0 && k == 0 ? schedule_small_aneg(s, pa, pb) : schedule_mixed_aneg(s, m, k, pa, pb);
  } catch (const std::invalid_argument& e) {
    throw InputError("config", e.what());
  } catch (const std::domain_error& e) {
    throw InputError("config", e.what());
  }
  const RealizedSchedule rz = realize(sch, a.eps);

  json r = report_header("schedule");
  r["regime"] = to_string(regime);
  r["eps"] = a.eps;
  r["target"] = config_json(rz.target);
  r["predicted"] = config_json(rz.predicted);
  r["predicted_matches_target"] = rz.predicted.s == rz.target.s;
  r["small_total"] = rz.small_total;
  r["large_total"] = rz.large_total;
  r["params"] = std::visit([](const auto& v) { return to_json(ParamSet{v}); }, rz.params);
  json v = json::array();
  for (std::size_t i = 0; i < rz.v.size(); ++i) v.push_back({{"name", "V" + std::to_string(2 * i + 1)}, {"value", rz.v[i]}});
  r["focal_values"] = v;
  r["innermost_forward"] = rz.innermost_forward ? json(to_string(*rz.innermost_forward)) : json(nullptr);
  r["innermost_claimed"] = rz.innermost_claimed ? json(to_string(*rz.innermost_claimed)) : json(nullptr);
  r["schedule"] = schedule_json(sch);
  emit(r, a.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string params, out, csv, interval;
  int scan = 64;
  double tol = 1e-12;
  double locator_tol = 1e-8;
  int order = 8;
  bool serial = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.params.empty()) throw InputError("params", "missing --params");
  if (a.scan < 2) throw InputError("scan", "must be >= 2");
  if (!(a.locator_tol > 0.0)) throw InputError("locator-tol", "must be positive");
  const ParamSet p = load_params(a.params);
  const Regime regime = regime_of(p);
  const auto canon = canonical_of(p);
  const double ca = std::visit([](const auto& c) { return c.a; }, canon);
  const double cb = std::visit([](const auto& c) { return c.b; }, canon);
  const SearchSetup setup = search_setup(regime, ca, cb);
  const auto interval = a.interval.empty() ? setup.interval : parse_interval(a.interval, "interval");
  if (interval.first <= 0.0) throw InputError("interval", "lower end must be positive");

  IntegratorConfig cfg;
  cfg.rel_tol = cfg.abs_tol = a.tol;
  cfg.order = a.order;
  cfg.escape_box = setup.escape_box;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw InputError("tol", e.what());
  }
  CycleSearchOptions so;
  so.locator_tol = a.locator_tol;
  so.loop_crossing = setup.loop_crossing;
  so.parallel = !a.serial;
  const PlanarField f = std::visit([](const auto& c) { return canonical_field(c); }, canon);
  const LimitCycleReport rep = find_cycles(f, interval, a.scan, cfg, so);

  json cycles = json::array();
  for (const auto& c : rep.cycles)
    cycles.push_back({{"section_x", c.section_x},
                      {"bracket", {c.bracket_lo, c.bracket_hi}},
                      {"period", c.period},
                      {"stability", to_string(c.stability)},
                      {"amplitude_class", to_string(c.amplitude_class)},
                      {"slope", c.slope},
                      {"hyperbolic", c.hyperbolic}});
  json r = report_header("simulate");
  r["regime"] = to_string(regime);
  r["params"] = to_json(p);
  r["canonical"] = canonical_json(canon);
  r["search"] = {{"interval", {interval.first, interval.second}},
                 {"scan", a.scan},
                 {"tol", a.tol},
                 {"order", a.order},
                 {"locator_tol", a.locator_tol},
                 {"loop_extent", setup.loop_extent},
                 {"loop_crossing", setup.loop_crossing},
                 {"escape_box", {setup.escape_box.xmin, setup.escape_box.xmax, setup.escape_box.ymin, setup.escape_box.ymax}}};
  r["cycles"] = cycles;
  r["small_cycles"] = std::count_if(rep.cycles.begin(), rep.cycles.end(),
                                    [](const CycleInfo& c) { return c.amplitude_class == AmplitudeClass::Small; });
  r["large_cycles"] = std::count_if(rep.cycles.begin(), rep.cycles.end(),
                                    [](const CycleInfo& c) { return c.amplitude_class == AmplitudeClass::Large; });
  r["escaped"] = rep.escaped;
  r["unresolved"] = rep.unresolved;
  r["samples"] = rep.displacement_samples.size();
  if (!a.csv.empty()) {
    std::ofstream f(a.csv, std::ios::binary);
    if (!f) throw InputError("csv", "cannot open '" + a.csv + "' for writing");
    f.precision(17);
    f << "x0,d\n";
    for (const auto& [x0, d] : rep.displacement_samples) f << x0 << ',' << d << '\n';
    r["csv"] = a.csv;
  }
  emit(r, a.out, out);
  return kExitOk;
}

// ---------------------------------------------------------------- verify

struct VerifyArgs {
  std::optional<std::string> regime;
  std::optional<int> draws;
  std::uint64_t seed = 7;
  std::string criteria, out;
  double one_cycle_eps = 0.01, two_cycle_eps = 0.05;
  bool serial = false;
};

int cmd_verify(const VerifyArgs& a, std::ostream& out) {
  if (!a.regime) throw InputError("regime", "missing --regime (apos, aneg or all)");
  VerifyOptions opt;
  if (*a.regime != "all") opt.regime = parse_regime(*a.regime);
  if (a.draws && *a.draws < 1) throw InputError("draws", "must be positive");
  opt.draws = a.draws;
  opt.seed = a.seed;
  opt.parallel = !a.serial;
  opt.one_cycle_eps = a.one_cycle_eps;
  opt.two_cycle_eps = a.two_cycle_eps;
  if (!a.criteria.empty()) {
    opt.criteria = parse_int_list(a.criteria, "criteria");
    for (int id : opt.criteria)
      if (id < 1 || id > 9) throw InputError("criteria", "ids must lie in 1..9");
  }
  if (!(a.one_cycle_eps > 0.0 && a.one_cycle_eps <= 0.1)) throw InputError("one-cycle-eps", "must lie in (0, 0.1]");
  if (!(a.two_cycle_eps > 0.0 && a.two_cycle_eps <= 0.1)) throw InputError("two-cycle-eps", "must lie in (0, 0.1]");

  const std::vector<CriterionResult> results = run_suite(opt);
  json crit = json::array();
  bool all = true;
  std::optional<double> max_rel;
  for (const auto& c : results) {
    json metrics = json::object();
    for (const auto& [k, v] : c.metrics) metrics[k] = v;
    crit.push_back({{"id", c.id},
                    {"name", c.name},
                    {"passed", c.passed},
                    {"runtime_limit_seconds", c.runtime_limit},
                    {"summary", c.summary},
                    {"metrics", metrics},
                    {"findings", c.findings}});
    all = all && c.passed;
    if (c.id == 1 || c.id == 2) max_rel = std::max(max_rel.value_or(0.0), c.metric("max_rel_err"));
  }
  json r = report_header("verify");
  r["params"] = {{"regime", *a.regime},
                 {"seed", a.seed},
                 {"draws", a.draws ? json(*a.draws) : json(nullptr)},
                 {"one_cycle_eps", a.one_cycle_eps},
                 {"two_cycle_eps", a.two_cycle_eps}};
  r["criteria"] = crit;
  r["max_rel_err"] = max_rel ? json(*max_rel) : json(nullptr);
  r["passed"] = all;
  emit(r, a.out, out);
  return all ? kExitOk : kExitVerifyFailure;
}

}  // namespace

// ---------------------------------------------------------------- parameters

ParamSet parse_params(const json& in) {
  const json& j = in.is_object() && in.contains("params") ? in.at("params") : in;
  if (!j.is_object()) throw InputError("params", "expected a JSON object");
  const double a = number_field(j, "a"), b = number_field(j, "b"), eps = number_field(j, "eps");
  const auto c = coefficient_block<6>(j, "c");
  const auto d = coefficient_block<6>(j, "d");
  const auto e = coefficient_block<9>(j, "e");
  const int forms = (c ? 1 : 0) + (d ? 1 : 0) + (e ? 1 : 0);
  if (forms > 1) throw InputError("params", "mixes physical (c), apos (d) and aneg (e) coefficients");
  if (a * b >= 0.0) throw InputError(a == 0.0 ? "a" : "b", "a and b must have opposite signs");
  if (std::abs(eps) > 0.1) throw InputError("eps", "|eps| must not exceed 0.1");
  auto validated = [](auto v) {
    try {
      v.validate();
    } catch (const std::invalid_argument& ex) {
      throw InputError("params", ex.what());
    }
    return ParamSet{v};
  };
  if (d) {
    if (a < 0.0) throw InputError("a", "apos coefficients (d) require a > 0");
    return validated(CanonicalApos{a, b, *d, eps});
  }
  if (e) {
    if (a > 0.0) throw InputError("a", "aneg coefficients (e) require a < 0");
    return validated(CanonicalAneg{a, b, *e, eps});
  }
  return validated(OscParams{a, b, c.value_or(std::array<double, 6>{}), eps});
}

ParamSet load_params(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("params", "cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::parse_error& e) {
    throw InputError("params", std::string("malformed JSON: ") + e.what());
  }
  return parse_params(j);
}

json to_json(const ParamSet& p) {
  if (const auto* o = std::get_if<OscParams>(&p))
    return {{"form", "physical"}, {"regime", o->a > 0 ? "apos" : "aneg"}, {"a", o->a}, {"b", o->b}, {"eps", o->eps}, {"c", o->c}};
  if (const auto* c = std::get_if<CanonicalApos>(&p))
    return {{"form", "canonical"}, {"regime", "apos"}, {"a", c->a}, {"b", c->b}, {"eps", c->eps}, {"d", c->d}};
  const auto& c = std::get<CanonicalAneg>(p);
  return {{"form", "canonical"}, {"regime", "aneg"}, {"a", c.a}, {"b", c.b}, {"eps", c.eps}, {"e", c.e}};
}

std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(item, &pos);
    } catch (const std::exception&) {
      throw InputError(field, "expected comma-separated integers, got '" + text + "'");
    }
    if (pos != item.size()) throw InputError(field, "expected comma-separated integers, got '" + text + "'");
    out.push_back(v);
  }
  if (out.empty()) throw InputError(field, "empty list");
  return out;
}

std::pair<double, double> parse_interval(const std::string& text, const std::string& field) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw InputError(field, "expected lo,hi");
  double lo = 0.0, hi = 0.0;
  try {
    std::size_t p1 = 0, p2 = 0;
    const std::string l = text.substr(0, comma), h = text.substr(comma + 1);
    lo = std::stod(l, &p1);
    hi = std::stod(h, &p2);
    if (p1 != l.size() || p2 != h.size()) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw InputError(field, "expected two numbers lo,hi, got '" + text + "'");
  }
  if (!(lo < hi)) throw InputError(field, "requires lo < hi");
  return {lo, hi};
}

// ---------------------------------------------------------------- entry

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Limit-cycle toolkit for the generalized Rayleigh-Lienard oscillator", "cycleforge"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string settings;
  auto add_settings = [&](CLI::App* sub) {
    sub->add_option("--config-file", settings, "JSON object of flag values; explicit flags win");
  };

  CanonicalArgs ca;
  auto* sc = app.add_subcommand("canonical", "Transform physical parameters to the canonical form and check conjugacy");
  sc->add_option("--params", ca.params, "Physical parameter JSON");
  sc->add_option("--samples", ca.samples, "Conjugacy sample points");
  sc->add_option("--seed", ca.seed, "Sampling seed");
  sc->add_option("--out", ca.out, "Report path (default stdout)");
  add_settings(sc);

  LyapunovArgs la;
  auto* sl = app.add_subcommand("lyapunov", "Closed focal values against the return-map series");
  sl->add_option("--params", la.params, "Parameter JSON (physical or canonical)");
  sl->add_option("--regime", la.regime, "apos or aneg; checked against the parameters");
  sl->add_option("--stage", la.stage, "Impose the vanishing chain up to this stage first (0..4)");
  sl->add_option("--steps", la.steps, "Fixed integration steps of the series");
  sl->add_option("--precision", la.precision, "quad or extended");
  sl->add_flag("--zero-trace", la.zero_trace, "Set the linear trace term (d3 or e3) to zero before evaluation");
  sl->add_option("--out", la.out, "Report path (default stdout)");
  add_settings(sl);

  MelnikovArgs ma;
  auto* sm = app.add_subcommand("melnikov", "Loop splitting function, closed form vs quadrature, and loop functionals");
  sm->add_option("--regime", ma.regime, "apos or aneg");
  sm->add_option("--params", ma.params, "Parameter JSON (physical or canonical)");
  sm->add_option("--out", ma.out, "Report path (default stdout)");
  add_settings(sm);

  ScheduleArgs sa;
  auto* ss = app.add_subcommand("schedule", "Realize a perturbation schedule for a cycle configuration");
  ss->add_option("--regime", sa.regime, "apos or aneg");
  ss->add_option("--config", sa.config, "s,m[,k]: small cycles, loop layers, loop-break count");
  ss->add_option("--eps", sa.eps, "Perturbation size, 0 < |eps| <= 0.1");
  ss->add_option("--a", sa.a, "Linear stiffness (default +1 apos, -1 aneg)");
  ss->add_option("--b", sa.b, "Cubic stiffness (default -1 apos, +1 aneg)");
  ss->add_option("--out", sa.out, "Report path (default stdout)");
  add_settings(ss);

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Scan the return map and locate limit cycles");
  sim->add_option("--params", si.params, "Parameter JSON (physical, canonical, or a schedule report)");
  sim->add_option("--interval", si.interval, "lo,hi section interval in canonical coordinates");
  sim->add_option("--scan", si.scan, "Scan points");
  sim->add_option("--tol", si.tol, "Integrator relative and absolute tolerance");
  sim->add_option("--order", si.order, "Integrator order: 5 or 8");
  sim->add_option("--locator-tol", si.locator_tol, "Bracket width of located cycles");
  sim->add_option("--csv", si.csv, "Write (x0, d) samples to this CSV");
  sim->add_flag("--serial", si.serial, "Disable OpenMP");
  sim->add_option("--out", si.out, "Report path (default stdout)");
  add_settings(sim);

  VerifyArgs va;
  auto* sv = app.add_subcommand("verify", "Run the acceptance suite");
  sv->add_option("--regime", va.regime, "apos, aneg or all");
  sv->add_option("--draws", va.draws, "Override per-criterion draw counts");
  sv->add_option("--seed", va.seed, "Random seed");
  sv->add_option("--criteria", va.criteria, "Comma-separated criterion ids");
  sv->add_option("--one-cycle-eps", va.one_cycle_eps, "eps of the one-cycle realization");
  sv->add_option("--two-cycle-eps", va.two_cycle_eps, "eps of the two-cycle realization");
  sv->add_flag("--serial", va.serial, "Disable OpenMP");
  sv->add_option("--out", va.out, "Report path (default stdout)");
  add_settings(sv);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!settings.empty()) apply_settings(sub, settings);
    const std::string name = sub->get_name();
    if (name == "canonical") return cmd_canonical(ca, out);
    if (name == "lyapunov") return cmd_lyapunov(la, out);
    if (name == "melnikov") return cmd_melnikov(ma, out);
    if (name == "schedule") return cmd_schedule(sa, out);
    if (name == "simulate") return cmd_simulate(si, out);
    return cmd_verify(va, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitVerifyFailure;
  }
}

}  // namespace cycleforge::cli
