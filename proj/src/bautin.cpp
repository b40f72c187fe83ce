#include "cycleforge/bautin.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "cycleforge/melnikov.hpp"

namespace cycleforge {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kOrders = kMaxEpsDegree + 1;
constexpr double kHierarchyRatio = 0.1;

using Polys = std::vector<std::vector<double>>;  // [coefficient index - 1][eps order]

Polys zero_polys(int n) { return Polys(static_cast<std::size_t>(n), std::vector<double>(kOrders, 0.0)); }

double& at(Polys& p, int k, int order) {
  return p.at(static_cast<std::size_t>(k - 1)).at(static_cast<std::size_t>(order));
}

int sgn(double v) { return (v > 0.0) - (v < 0.0); }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

CanonicalApos apos_at(const Polys& p, double a, double b, int order) {
  CanonicalApos c;
  c.a = a;
  c.b = b;
  c.eps = 1.0;
  for (int k = 1; k <= 6; ++k) c.dk(k) = p[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(order)];
  return c;
}

CanonicalAneg aneg_at(const Polys& p, double a, double b, int order) {
  CanonicalAneg c;
  c.a = a;
  c.b = b;
  c.eps = 1.0;
  for (int k = 1; k <= 9; ++k) c.ek(k) = p[static_cast<std::size_t>(k - 1)][static_cast<std::size_t>(order)];
  return c;
}

PerturbationSchedule finish(Regime regime, double a, double b, Configuration target, const Polys& p) {
  PerturbationSchedule s;
  s.regime = regime;
  s.a = a;
  s.b = b;
  s.target = target;
  const char prefix = regime == Regime::Apos ? 'd' : 'e';
  for (std::size_t k = 0; k < p.size(); ++k) {
    EpsPolynomial poly{std::string(1, prefix) + std::to_string(k + 1), p[k]};
    for (double v : poly.coeffs)
      if (!std::isfinite(v)) throw std::domain_error("schedule: non-finite coefficient in " + poly.name);
    const int deg = poly.degree();
    poly.coeffs.resize(static_cast<std::size_t>(std::max(deg, 0) + 1));
    s.assignments.push_back(std::move(poly));
  }
  return s;
}

void check_constraints(const PerturbationSchedule& s) {
  for (const auto& c : s.sign_constraints)
    if (!c.satisfied())
      throw std::invalid_argument("schedule: sign constraint violated for " + c.name + " (value " + fmt(c.value) +
                                  ", threshold " + fmt(c.threshold) + ", required sign " + std::to_string(c.sign) +
                                  ")");
}

void check_ab(Regime r, double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::invalid_argument("schedule: non-finite a or b");
  if (r == Regime::Apos && !(a > 0.0 && b < 0.0)) throw std::invalid_argument("schedule: apos requires a > 0, b < 0");
  if (r == Regime::Aneg && !(a < 0.0 && b > 0.0)) throw std::invalid_argument("schedule: aneg requires a < 0, b > 0");
}

void require_nonzero(double v, const char* name) {
  if (!std::isfinite(v) || v == 0.0) throw std::invalid_argument(std::string("schedule: ") + name + " must be nonzero");
}

// Leading eps order of a coefficient series, or -1 when every order is negligible.
int leading_order(const std::vector<double>& series, double scale) {
  const double tiny = 1e-12 * std::max(1.0, scale);
  for (std::size_t k = 0; k < series.size(); ++k)
    if (std::abs(series[k]) > tiny) return static_cast<int>(k);
  return -1;
}

double max_abs(const Polys& p) {
  double m = 0.0;
  for (const auto& row : p)
    for (double v : row) m = std::max(m, std::abs(v));
  return m;
}

// Linear forms L3, L5 with V3 = c3 * eps * L3 and V5 = c5 * eps * L5 to leading order, one per regime.
struct SmallForms {
  double c3 = 0.0, c5 = 0.0;
  std::function<double(const Polys&, int)> L3, L5;
  int knob = 0;   // y^4 coefficient used to cancel the leading V3 term
  int trace = 0;  // coefficient of y (V1 = -pi eps trace)
};

// Adds s <= 2 small cycles on top of loop layers; apply_loop re-imposes the loop layers after each change.
void add_small_layers(Polys& p, int s, double magnitude, const SmallForms& f, const std::function<void(Polys&)>& apply_loop,
                      std::vector<SignConstraint>& constraints, std::vector<std::pair<std::string, double>>& named,
                      std::vector<std::string>& notes, const std::string& prefix) {
  apply_loop(p);
  if (s == 0) return;
  auto series = [&](const std::function<double(const Polys&, int)>& L) {
    std::vector<double> out(kOrders);
    for (int k = 0; k < kOrders; ++k) out[static_cast<std::size_t>(k)] = L(p, k);
    return out;
  };
  const double scale = std::max(1.0, max_abs(p));
  int q3 = leading_order(series(f.L3), scale);
  if (q3 < 0) throw std::domain_error("schedule: V3 vanishes identically on the loop layers");
  if (s >= 2) {
    // Cancel the leading V3 term with the y^4 knob, then set the next order against V5.
    auto solve_knob = [&](int order, double target) {
      at(p, f.knob, order) = 0.0;
      apply_loop(p);
      const double l0 = f.L3(p, order);
      at(p, f.knob, order) = 1.0;
      apply_loop(p);
      const double l1 = f.L3(p, order);
      if (l1 == l0) throw std::domain_error("schedule: y^4 knob does not move V3");
      const double x = (target - l0) / (l1 - l0);
      at(p, f.knob, order) = x;
      apply_loop(p);
      named.emplace_back(prefix + std::to_string(f.knob) + std::to_string(order), x);
      return x;
    };
    solve_knob(q3, 0.0);
    const int q5 = leading_order(series(f.L5), scale);
    if (q5 < 0 || q5 > q3) throw std::domain_error("schedule: V5 does not dominate V3 on the loop layers");
    const int sigma5 = sgn(f.c5 * f.L5(p, q5));
    const double target = -sigma5 * sgn(f.c3) * magnitude;
    solve_knob(q3 + 1, target);
    q3 += 1;
    constraints.push_back({"V3 against V5 at leading order", -sigma5, f.c3 * f.L3(p, q3), 0.0});
    const int j = 2 * q3 - q5 + 1;
    if (j > kMaxEpsDegree) throw std::domain_error("schedule: trace layer exceeds the maximum eps degree");
    const int sigma3 = sgn(f.c3 * f.L3(p, q3));
    at(p, f.trace, j) = sigma3 * magnitude;
    named.emplace_back(prefix + std::to_string(f.trace) + std::to_string(j), sigma3 * magnitude);
    constraints.push_back({"V1 against V3", -sigma3, -kPi * at(p, f.trace, j), 0.0});
    notes.push_back("two small cycles: y^4 knob at eps^" + std::to_string(q3 - 1) + ", eps^" + std::to_string(q3) +
                    "; trace at eps^" + std::to_string(j));
  } else {
    const int j = q3 + 2;
    const int sigma3 = sgn(f.c3 * f.L3(p, q3));
    at(p, f.trace, j) = sigma3 * magnitude;
    named.emplace_back(prefix + std::to_string(f.trace) + std::to_string(j), sigma3 * magnitude);
    constraints.push_back({"V1 against V3", -sigma3, -kPi * at(p, f.trace, j), 0.0});
    notes.push_back("one small cycle: trace at eps^" + std::to_string(j));
  }
  apply_loop(p);
}

}  // namespace

double EpsPolynomial::operator()(double eps) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * eps + *it;
  return acc;
}

int EpsPolynomial::degree() const {
  for (int k = static_cast<int>(coeffs.size()) - 1; k >= 0; --k)
    if (coeffs[static_cast<std::size_t>(k)] != 0.0) return k;
  return -1;
}

const EpsPolynomial& PerturbationSchedule::assignment(const std::string& name) const {
  for (const auto& p : assignments)
    if (p.name == name) return p;
  throw std::out_of_range("PerturbationSchedule: no assignment " + name);
}

double PerturbationSchedule::coefficient(const std::string& name) const {
  for (const auto& [n, v] : coefficients)
    if (n == name) return v;
  throw std::out_of_range("PerturbationSchedule: no coefficient " + name);
}

PerturbationSchedule schedule_small_apos(int s, double a, double b, const SmallAposChoices& ch) {
  check_ab(Regime::Apos, a, b);
  if (s < 1 || s > 5) throw std::invalid_argument("schedule_small_apos: s must be in 1..5");
  require_nonzero(ch.d4, "d4");
  const double a2 = a * a, d4 = ch.d4, d43 = d4 * d4 * d4;
  const double d63 = s >= 1 ? ch.d63 : 0.0, d54 = s >= 2 ? ch.d54 : 0.0, d15 = s >= 3 ? ch.d15 : 0.0,
               d26 = s >= 4 ? ch.d26 : 0.0, d37 = s >= 5 ? ch.d37 : 0.0;
  const double d62 = 12 * a2 * d43 / (35 * b), d52 = -30 * d43 / 7, d53 = -16 * b * d63 / a2;
  const double d10 = -6 * b * d4 / a2, d12 = -12 * a2 * d43 / (7 * b), d13 = -5 * d63, d20 = -3 * d4;

  Polys p = zero_polys(6);
  at(p, 4, 0) = d4;
  at(p, 6, 2) = d62;
  at(p, 6, 3) = d63;
  at(p, 5, 2) = d52;
  at(p, 5, 3) = d53;
  at(p, 5, 4) = d54;
  at(p, 1, 0) = d10;
  at(p, 1, 2) = d12;
  at(p, 1, 3) = d13;
  at(p, 1, 5) = d15;
  at(p, 2, 0) = d20;
  at(p, 2, 6) = d26;
  at(p, 3, 7) = d37;

  PerturbationSchedule sch = finish(Regime::Apos, a, b, {s, 0, 0}, p);
  sch.provenance = "nested weak-focus schedule, apos, d4 branch " + std::string(d4 > 0 ? "+" : "-");
  sch.coefficients = {{"d4", d4},   {"d62", d62}, {"d63", d63}, {"d52", d52}, {"d53", d53},
                      {"d54", d54}, {"d10", d10}, {"d12", d12}, {"d13", d13}, {"d15", d15},
                      {"d20", d20}, {"d26", d26}, {"d37", d37}};
  // Each active layer must oppose the next higher V; with d4 > 0 the signs are (+, -, +, -, +).
  const int sd4 = sgn(d4);
  const std::array<std::pair<const char*, double>, 5> chain{
      {{"d63", d63}, {"d54", d54}, {"d15", d15}, {"d26", d26}, {"d37", d37}}};
  for (int i = 0; i < s; ++i)
    sch.sign_constraints.push_back({chain[static_cast<std::size_t>(i)].first, (i % 2 == 0 ? 1 : -1) * sd4,
                                    chain[static_cast<std::size_t>(i)].second, 0.0});
  check_constraints(sch);
  return sch;
}

PerturbationSchedule schedule_mixed_apos(int s, int m, double a, double b, const MixedAposChoices& ch) {
  check_ab(Regime::Apos, a, b);
  if (s < 0 || s > 5 || m < 0 || m > 3 || s + m > 5)
    throw std::invalid_argument("schedule_mixed_apos: requires 0 <= s, 0 <= m <= 3, s + m <= 5");
  if (s + m == 0) throw std::invalid_argument("schedule_mixed_apos: empty configuration");
  if (m == 0) {
    PerturbationSchedule sch = schedule_small_apos(s, a, b);
    sch.notes.push_back("no loop layers; delegated to the nested weak-focus schedule");
    return sch;
  }
  if (s > 2)
    throw std::domain_error(
        "schedule_mixed_apos: more than two small cycles on top of loop layers is not realizable by this construction");
  if (!(ch.d51 < 0.0) || !(ch.d12 < 0.0) || !(ch.d23 > 0.0))
    throw std::invalid_argument("schedule_mixed_apos: requires d51 < 0, d12 < 0, d23 > 0");
  if (!(ch.small_magnitude > 0.0)) throw std::invalid_argument("schedule_mixed_apos: small_magnitude must be > 0");

  auto apply_loop = [&](Polys& p) {
    for (int k = 0; k < kOrders; ++k) {
      at(p, 5, k) = phi3(apos_at(p, a, b, k)) + (k == 1 ? ch.d51 : 0.0);
      at(p, 1, k) = phi2(apos_at(p, a, b, k)) + (k == 2 && m >= 2 ? ch.d12 : 0.0);
      at(p, 2, k) = phi1(apos_at(p, a, b, k)) + (k == 3 && m >= 3 ? ch.d23 : 0.0);
    }
  };
  SmallForms f;
  f.c3 = -kPi / 4;
  f.c5 = -kPi / 8;
  f.L3 = [](const Polys& p, int k) { return p[1][static_cast<std::size_t>(k)] + 3 * p[3][static_cast<std::size_t>(k)]; };
  f.L5 = [a, b](const Polys& p, int k) {
    const auto kk = static_cast<std::size_t>(k);
    return p[0][kk] + 5 * p[5][kk] + 6 * b * p[3][kk] / (a * a);
  };
  f.knob = 6;
  f.trace = 3;

  PerturbationSchedule tmp;
  Polys p = zero_polys(6);
  add_small_layers(p, s, ch.small_magnitude, f, apply_loop, tmp.sign_constraints, tmp.coefficients, tmp.notes, "d");

  PerturbationSchedule sch = finish(Regime::Apos, a, b, {s, m, 0}, p);
  sch.provenance = "loop layers on the heteroclinic surface (d5 stability, d1 saddle divergence, d2 splitting)";
  sch.sign_constraints = {{"d51", -1, ch.d51, 0.0}};
  if (m >= 2) sch.sign_constraints.push_back({"d12", -1, ch.d12, 0.0});
  if (m >= 3) sch.sign_constraints.push_back({"d23", 1, ch.d23, 0.0});
  for (auto& c : tmp.sign_constraints) sch.sign_constraints.push_back(c);
  // d51, d12, d23 are the free layer values; the rest are polynomial coefficients.
  sch.coefficients = {{"d50", at(p, 5, 0)}, {"d51", ch.d51}, {"d10", at(p, 1, 0)}, {"d11", at(p, 1, 1)},
                      {"d12", m >= 2 ? ch.d12 : 0.0}, {"d20", at(p, 2, 0)}, {"d21", at(p, 2, 1)},
                      {"d22", at(p, 2, 2)}, {"d23", m >= 3 ? ch.d23 : 0.0}};
  for (auto& c : tmp.coefficients) sch.coefficients.push_back(c);
  sch.notes = tmp.notes;
  sch.notes.push_back("base d3 = d4 = d6 = 0; eps^0 loop coefficients derived from the loop functionals");
  check_constraints(sch);
  return sch;
}

namespace {

struct AnegThresholds {
  double t7 = 0.0;   // e7 threshold
  double t92 = 0.0;  // e92 threshold
};

AnegThresholds aneg_thresholds(double a, double b, double e4, double e6, double e7, double e8) {
  const double sb = std::sqrt(b), b32 = b * sb;
  AnegThresholds t;
  t.t7 = a * (785 * a * a * e6 + 26 * a * sb * e8 - 117 * b * e4) / (13 * b32);
  t.t92 = (2.0 / 105.0) * (2 * a * (9 * e4 * e4 * e4 + 12 * e4 * e7 * e8 - 5 * e6 * e7 * e7) / sb -
                           79 * sb * e4 * e7 * e7 / a - 126 * e4 * e4 * e7);
  return t;
}

double with_margin(double threshold, int side) {
  // Default choice past a threshold: factor 2 on its magnitude, at least unit distance.
  return threshold + side * std::max(std::abs(threshold), 1.0);
}

}  // namespace

PerturbationSchedule schedule_small_aneg(int s, double a, double b, const SmallAnegChoices& ch) {
  check_ab(Regime::Aneg, a, b);
  if (s < 1 || s > 5) throw std::invalid_argument("schedule_small_aneg: s must be in 1..5");
  const double sb = std::sqrt(b), b32 = b * sb, b2 = b * b;
  const double a2 = a * a, a3 = a2 * a, a4 = a2 * a2, a5 = a4 * a;
  const double e4 = ch.e4, e6 = ch.e6, e8 = ch.e8;
  const double t7 = aneg_thresholds(a, b, e4, e6, 0.0, e8).t7;
  const double e7 = ch.e7.value_or(with_margin(t7, 1));
  if (e7 == t7) throw std::invalid_argument("schedule_small_aneg: e7 must differ from its threshold");
  const int branch = e7 > t7 ? 1 : -1;  // sign of the V11 leading term
  const double t92 = aneg_thresholds(a, b, e4, e6, e7, e8).t92;
  const double e51 = s >= 1 ? ch.e51 : 0.0;
  const double e92 = s >= 2 ? ch.e92.value_or(with_margin(t92, branch)) : t92;
  const double e13 = s >= 3 ? ch.e13 : 0.0, e24 = s >= 4 ? ch.e24 : 0.0, e35 = s >= 5 ? ch.e35 : 0.0;

  const double e50 = b * (-1665 * a3 * e6 - 154 * a2 * sb * e8 + 693 * a * b * e4 + 77 * b32 * e7) / (200 * a5);
  const double e90 = (1195 * a3 * sb * e6 + 222 * a2 * b * e8 - 999 * a * b32 * e4 - 111 * b2 * e7) / (100 * a4);
  const double e91 = -2 * a * e51 / (7 * sb);
  const double e10 = (-20 * a3 * e6 - 10 * a2 * sb * e8 + 39 * a * b * e4 + 5 * b32 * e7) / (4 * a3);
  const double e12 = 2 * e4 * e7 * e7 / 3;
  const double e20 = -3 * sb * e7 / (2 * a) - 3 * e4;

  Polys p = zero_polys(9);
  at(p, 4, 0) = e4;
  at(p, 6, 0) = e6;
  at(p, 7, 0) = e7;
  at(p, 8, 0) = e8;
  at(p, 5, 0) = e50;
  at(p, 5, 1) = e51;
  at(p, 9, 0) = e90;
  at(p, 9, 1) = e91;
  at(p, 9, 2) = e92;
  at(p, 1, 0) = e10;
  at(p, 1, 2) = e12;
  at(p, 1, 3) = e13;
  at(p, 2, 0) = e20;
  at(p, 2, 4) = e24;
  at(p, 3, 5) = e35;

  PerturbationSchedule sch = finish(Regime::Aneg, a, b, {s, 0, 0}, p);
  sch.provenance = "nested weak-focus schedule, aneg, e7 " + std::string(branch > 0 ? "above" : "below") + " threshold";
  sch.coefficients = {{"e4", e4},   {"e6", e6},   {"e7", e7},   {"e8", e8},   {"e7_threshold", t7},
                      {"e50", e50}, {"e51", e51}, {"e90", e90}, {"e91", e91}, {"e92", e92},
                      {"e92_threshold", t92},     {"e10", e10}, {"e12", e12}, {"e13", e13},
                      {"e20", e20}, {"e24", e24}, {"e35", e35}};
  sch.sign_constraints.push_back({"e51", branch, e51, 0.0});
  if (s >= 2) sch.sign_constraints.push_back({"e92", branch, e92, t92});
  if (s >= 3) sch.sign_constraints.push_back({"e13", branch, e13, 0.0});
  if (s >= 4) sch.sign_constraints.push_back({"e24", -branch, e24, 0.0});
  // V1 must oppose V3; this is the sign of e24 flipped.
  if (s >= 5) sch.sign_constraints.push_back({"e35", branch, e35, 0.0});
  if (s < 2) sch.notes.push_back("e92 set to its threshold so that the leading V7 term vanishes");
  check_constraints(sch);
  return sch;
}

PerturbationSchedule schedule_mixed_aneg(int s, int m, int k, double a, double b, const MixedAnegChoices& ch) {
  check_ab(Regime::Aneg, a, b);
  if (s < 0 || s > 5 || m < 0 || m > 2 || (k != 1 && k != 2) || 2 * s + 3 * m + k > 12)
    throw std::invalid_argument("schedule_mixed_aneg: requires 0 <= s <= 5, 0 <= m <= 2, k in {1, 2}, 2s + 3m + k <= 12");
  if (!(ch.layer_magnitude > 0.0) || !(ch.small_magnitude > 0.0))
    throw std::invalid_argument("schedule_mixed_aneg: magnitudes must be > 0");
  const int break_sign = k == 1 ? 1 : -1;  // M2 > 0 breaks outward (one external cycle)

  if (m == 0 && s >= 3) {
    // Weak-focus schedule with the loop already broken at first order; the e7 branch sets the sign of M2.
    for (int branch : {1, -1}) {
      SmallAnegChoices sc;
      sc.e7 = with_margin(aneg_thresholds(a, b, 0.0, 0.0, 0.0, 0.0).t7, branch);
      sc.e51 = branch;
      sc.e13 = branch;
      sc.e24 = -branch;
      sc.e35 = branch;
      PerturbationSchedule sch = schedule_small_aneg(s, a, b, sc);
      CanonicalAneg base;
      base.a = a;
      base.b = b;
      base.eps = 1.0;
      for (int i = 1; i <= 9; ++i) base.ek(i) = sch.assignment("e" + std::to_string(i))(0.0);
      const double m2 = m2_closed(base);
      if (sgn(m2) != break_sign) continue;
      sch.target = {s, 0, k};
      sch.provenance += "; loop broken at first order by the eps^0 coefficients";
      sch.sign_constraints.push_back({"M2 at eps^0", break_sign, m2, 0.0});
      sch.coefficients.emplace_back("M2_eps0", m2);
      sch.notes.push_back("e7 branch " + std::string(branch > 0 ? "above" : "below") +
                          " its threshold selected so that M2 has the requested sign");
      return sch;
    }
    throw std::domain_error("schedule_mixed_aneg: neither e7 branch gives the requested loop-break sign");
  }
  if (s > 2)
    throw std::domain_error(
        "schedule_mixed_aneg: more than two small cycles on top of loop layers is not realizable by this construction");

  const double mag = ch.layer_magnitude;
  // Layer signs: e5 layer fixes the sign of the stability integral, the e1 layer opposes it with the
  // saddle divergence, and the e2 layer breaks the loop with the sign requested by k.
  double e5L = mag, e1L = 0.0, eB = 0.0;
  const int break_order = m + 1;
  auto apply_loop_with = [&](Polys& p, double e1l, double eb) {
    for (int o = 0; o < kOrders; ++o) {
      at(p, 5, o) = phi3_aneg(aneg_at(p, a, b, o)) + (o == 1 && m >= 1 ? e5L : 0.0);
      at(p, 1, o) = phi2_aneg(aneg_at(p, a, b, o)) + (o == 2 && m >= 2 ? e1l : 0.0);
      at(p, 2, o) = phi1_aneg(aneg_at(p, a, b, o)) + (o == break_order ? eb : 0.0);
    }
  };
  const LoopGeometry g = loop_aneg(a, b);
  {
    Polys probe = zero_polys(9);
    apply_loop_with(probe, 0.0, 0.0);
    if (m >= 2) {
      const double i1 = loop_stability_integral(impose_loop_surface(aneg_at(probe, a, b, 1)), g);
      Polys q = probe;
      at(q, 1, 2) += 1.0;
      const double dv = div_q1(aneg_at(q, a, b, 2));
      e1L = -sgn(i1) * sgn(dv) * mag;
    }
    Polys q = probe;
    apply_loop_with(q, e1L, 1.0);
    const double m2 = m2_closed(aneg_at(q, a, b, break_order));
    eB = break_sign * sgn(m2) * mag;
  }
  auto apply_loop = [&](Polys& p) { apply_loop_with(p, e1L, eB); };

  SmallForms f;
  const double sb = std::sqrt(b), b32 = b * sb;
  f.c3 = -kPi / 8;
  f.c5 = kPi / 96;
  f.L3 = [a, sb](const Polys& p, int o) {
    const auto kk = static_cast<std::size_t>(o);
    return (2 * a * (p[1][kk] + 3 * p[3][kk]) + 3 * sb * p[6][kk]) / a;
  };
  f.L5 = [a, b, sb, b32](const Polys& p, int o) {
    const auto kk = static_cast<std::size_t>(o);
    const double a3 = a * a * a;
    return (-4 * a3 * (3 * p[0][kk] + 15 * p[5][kk]) - 30 * a * a * sb * p[7][kk] + 117 * a * b * p[3][kk] +
            15 * b32 * p[6][kk]) /
           a3;
  };
  f.knob = 6;
  f.trace = 3;

  PerturbationSchedule tmp;
  Polys p = zero_polys(9);
  add_small_layers(p, s, ch.small_magnitude, f, apply_loop, tmp.sign_constraints, tmp.coefficients, tmp.notes, "e");

  PerturbationSchedule sch = finish(Regime::Aneg, a, b, {s, m, k}, p);
  sch.provenance = "loop layers on the homoclinic surface (e5 stability, e1 saddle divergence, e2 break)";
  const double i1 = loop_stability_integral(impose_loop_surface(aneg_at(p, a, b, 1)), g);
  if (m >= 1) {
    sch.sign_constraints.push_back({"stability integral at eps^1", sgn(i1) != 0 ? sgn(i1) : 1, i1, 0.0});
    sch.coefficients.emplace_back("e5_layer", e5L);
  }
  if (m >= 2) {
    const double dv = div_q1(aneg_at(p, a, b, 2));
    sch.sign_constraints.push_back({"saddle divergence against stability", -sgn(i1), dv, 0.0});
    sch.coefficients.emplace_back("e1_layer", e1L);
  }
  const double m2 = m2_closed(aneg_at(p, a, b, break_order));
  sch.sign_constraints.push_back({"M2 break sign", break_sign, m2, 0.0});
  sch.coefficients.emplace_back("e2_break", eB);
  sch.coefficients.emplace_back("break_order", break_order);
  for (auto& c : tmp.sign_constraints) sch.sign_constraints.push_back(c);
  for (auto& c : tmp.coefficients) sch.coefficients.push_back(c);
  sch.notes = tmp.notes;
  sch.notes.push_back("base coefficients zero; loop layers solved order by order on the loop functionals");
  check_constraints(sch);
  return sch;
}

int count_alternations(const std::array<double, 6>& v, double gate) {
  std::vector<double> chain;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool zero = i == 0 ? v[i] == 0.0 : std::abs(v[i]) <= gate;
    if (!zero) chain.push_back(v[i]);
  }
  int n = 0;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    if (sgn(chain[i]) == sgn(chain[i + 1])) break;
    if (std::abs(chain[i] / chain[i + 1]) >= kHierarchyRatio) break;
    ++n;
  }
  return n;
}

RealizedSchedule realize(const PerturbationSchedule& sch, double eps) {
  if (!std::isfinite(eps) || eps == 0.0 || std::abs(eps) > 0.1)
    throw std::invalid_argument("realize: eps must satisfy 0 < |eps| <= 0.1");
  RealizedSchedule r;
  r.regime = sch.regime;
  r.eps = eps;
  r.target = sch.target;
  double scale = 1.0;
  for (const auto& p : sch.assignments) scale = std::max(scale, std::abs(p(eps)));
  double trace = 0.0;
  LyapunovSpectrum spec;
  if (sch.regime == Regime::Apos) {
    CanonicalApos c;
    c.a = sch.a;
    c.b = sch.b;
    c.eps = eps;
    for (int k = 1; k <= 6; ++k) c.dk(k) = sch.assignment("d" + std::to_string(k))(eps);
    c.validate();
    trace = c.dk(3);
    CanonicalApos t = c;
    t.dk(3) = 0.0;
    spec = closed_v_apos(t);
    r.params = c;
  } else {
    CanonicalAneg c;
    c.a = sch.a;
    c.b = sch.b;
    c.eps = eps;
    for (int k = 1; k <= 9; ++k) c.ek(k) = sch.assignment("e" + std::to_string(k))(eps);
    c.validate();
    trace = c.ek(3);
    CanonicalAneg t = c;
    t.ek(3) = 0.0;
    spec = closed_v_aneg(t);
    r.params = c;
  }
  r.v[0] = std::expm1(-kPi * eps * trace);
  for (int i = 1; i <= 5; ++i) r.v[static_cast<std::size_t>(i)] = spec.v(2 * i + 1);

  // Rounding floor of the closed forms, which cancel O(scale) terms.
  const double gate = 32 * DBL_EPSILON * std::abs(eps) * scale;
  const int s = count_alternations(r.v, gate);
  r.predicted = {s, sch.target.m, sch.target.k};
  if (s > 0) {
    double lowest = 0.0;
    for (std::size_t i = 0; i < r.v.size(); ++i) {
      const bool zero = i == 0 ? r.v[i] == 0.0 : std::abs(r.v[i]) <= gate;
      if (!zero) {
        lowest = r.v[i];
        break;
      }
    }
    // Forward displacement is -V r^k: the focus attracts when V > 0, so the innermost cycle repels.
    r.innermost_forward = lowest > 0 ? Stability::Unstable : Stability::Stable;
  }
  if (sch.regime == Regime::Apos && sch.target.m == 0) r.innermost_claimed = Stability::Unstable;
  if (sch.regime == Regime::Apos) {
    r.small_total = s;
    r.large_total = sch.target.m;
  } else {
    r.small_total = 2 * s;
    r.large_total = 3 * sch.target.m + sch.target.k;
  }
  return r;
}

LoopBaseComparison compare_printed_loop_base(const CanonicalApos& base) {
  const double a = base.a, b = base.b, a2 = a * a, a4 = a2 * a2, a6 = a4 * a2, b2 = b * b;
  const double d3 = base.dk(3), d4 = base.dk(4), d6 = base.dk(6);
  LoopBaseComparison out;
  out.printed = {(1848 * b2 * b * d3 + 1386 * a2 * b2 * d4 - 600 * a4 * b * d6) / (11 * a6),
                 (66 * b * (70 * b * d3 + 39 * a2 * d4) - 1160 * a4 * d6) / (33 * a4),
                 (1980 * a2 * b2 * d3 + 495 * a2 * b * d4 - 260 * a4 * b * d6) / (66 * a2 * b)};
  CanonicalApos c = base;
  c.dk(5) = phi3(c);
  c.dk(1) = phi2(c);
  c.dk(2) = phi1(c);
  out.derived = {c.dk(5), c.dk(1), c.dk(2)};
  return out;
}

}  // namespace cycleforge
