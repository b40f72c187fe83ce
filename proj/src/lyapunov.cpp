#include "cycleforge/lyapunov.hpp"

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/float128.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <stdexcept>

namespace cycleforge {

namespace odeint = boost::numeric::odeint;

std::string to_string(Regime r) { return r == Regime::Apos ? "apos" : "aneg"; }

double LyapunovSpectrum::v(int index) const {
  if (index < 1 || index % 2 == 0) throw std::out_of_range("LyapunovSpectrum::v: odd index expected");
  return entries.at(static_cast<std::size_t>((index - 1) / 2)).value;
}

int LyapunovSpectrum::first_nonzero() const {
  for (std::size_t k = 1; k < entries.size(); ++k)
    if (entries[k].valid && std::abs(entries[k].value) >= gate_tolerance) return entries[k].order * 2 + 1;
  return 0;
}

namespace {

LyapunovSpectrum gate(Regime regime, double eps, const std::array<double, 5>& v) {
  LyapunovSpectrum s;
  s.regime = regime;
  s.gate_tolerance = 1e-9 * std::abs(eps);
  s.entries.push_back({0, 1.0, true});
  bool lower_vanish = true;
  for (int k = 1; k <= 5; ++k) {
    s.entries.push_back({k, v[static_cast<std::size_t>(k - 1)], lower_vanish});
    lower_vanish = lower_vanish && std::abs(v[static_cast<std::size_t>(k - 1)]) < s.gate_tolerance;
  }
  return s;
}

}  // namespace

LyapunovSpectrum closed_v_apos(const CanonicalApos& c) {
  c.validate();
  if (c.dk(3) != 0.0) throw std::invalid_argument("closed_v_apos: requires d3 = 0");
  if (c.eps == 0.0) throw std::invalid_argument("closed_v_apos: requires eps != 0");
  const double a = c.a, b = c.b, e = c.eps, pi = M_PI;
  const double d1 = c.dk(1), d2 = c.dk(2), d4 = c.dk(4), d5 = c.dk(5), d6 = c.dk(6);
  const double a2 = a * a, a4 = a2 * a2, a8 = a4 * a4, a12 = a8 * a4, b2 = b * b, e2 = e * e;
  const double d43 = d4 * d4 * d4;
  std::array<double, 5> v{};
  v[0] = -(pi * e / 4.0) * (d2 + 3.0 * d4);
  v[1] = -pi * e * (a2 * d1 + 5.0 * a2 * d6 + 6.0 * b * d4) / (8.0 * a2);
  v[2] = -pi * e * (-6.0 * a2 * d43 * e2 + 5.0 * a2 * d5 + 80.0 * b * d6) / (64.0 * a2);
  v[3] = 3.0 * pi * e * (15.0 * a4 * d4 * d4 * d6 * e2 + 12.0 * a2 * b * d43 * e2 - 35.0 * b2 * d6) / (160.0 * a4);
  const double q = 3.0 * a4 * d4 * d4 * e2 - 7.0 * b2;
  const double d42 = d4 * d4, e4 = e2 * e2, b4 = b2 * b2;
  v[4] = -3.0 * pi * d43 * e2 * e / (3200.0 * a4 * q * q) *
         (315.0 * a12 * d42 * d42 * d42 * e4 * e2 + 2644.0 * a8 * b2 * d42 * d42 * e4 - 9065.0 * a4 * b4 * d42 * e2 -
          7350.0 * b4 * b2);
  return gate(Regime::Apos, e, v);
}

double v11_sign_surrogate(const CanonicalAneg& c) {
  const double a = c.a, b = c.b, sb = std::sqrt(b);
  return 231.0 * M_PI * b * b * b / (204800.0 * std::pow(a, 9)) *
         (785.0 * a * a * a * c.ek(6) + 26.0 * a * a * sb * c.ek(8) - 117.0 * a * b * c.ek(4) -
          13.0 * b * sb * c.ek(7));
}

LyapunovSpectrum closed_v_aneg(const CanonicalAneg& c) {
  c.validate();
  if (c.ek(3) != 0.0) throw std::invalid_argument("closed_v_aneg: requires e3 = 0");
  if (c.eps == 0.0) throw std::invalid_argument("closed_v_aneg: requires eps != 0");
  const double a = c.a, b = c.b, eps = c.eps, pi = M_PI, sb = std::sqrt(b);
  const double e1 = c.ek(1), e2 = c.ek(2), e4 = c.ek(4), e5 = c.ek(5), e6 = c.ek(6), e7 = c.ek(7), e8 = c.ek(8),
               e9 = c.ek(9);
  const double b32 = b * sb, b52 = b * b * sb, ep2 = eps * eps, ep4 = ep2 * ep2, ep6 = ep4 * ep2, ep8 = ep4 * ep4;
  auto P = [](double x, int n) { return std::pow(x, n); };
  const double pole = 848.0 * P(a, 3) * e4 * e7 * ep2 + 7875.0 * b32;
  if (pole == 0.0) throw std::invalid_argument("closed_v_aneg: V11 denominator vanishes");

  std::array<double, 5> v{};
  v[0] = -pi * eps * (2 * a * (e2 + 3 * e4) + 3 * sb * e7) / (8 * a);
  v[1] = pi * eps / (96 * P(a, 3)) *
         (-4 * P(a, 3) * (3 * e1 - 2 * e4 * e7 * e7 * ep2 + 15 * e6) - 30 * a * a * sb * e8 + 117 * a * b * e4 +
          15 * b32 * e7);
  v[2] = pi * eps / (384 * P(a, 5)) *
         (P(a, 5) * (4 * ep2 * (9 * P(e4, 3) + 12 * e4 * e7 * e8 - 5 * e6 * e7 * e7) - 30 * e5) -
          21 * P(a, 4) * sb * (12 * e4 * e4 * e7 * ep2 + 5 * e9) + P(a, 3) * b * (1005 * e6 - 158 * e4 * e7 * e7 * ep2) +
          210 * a * a * b32 * e8 - 945 * a * b * b * e4 - 105 * b52 * e7);
  {
    const double t1 = 64 * P(a, 6) * e7 * ep4 *
                      (212 * a * a * e4 * (9 * P(e4, 3) + 12 * e4 * e7 * e8 - 5 * e6 * e7 * e7) +
                       63 * a * sb * e7 * (10 * e6 * e7 * e7 - 147 * P(e4, 3)) + 2441 * b * e4 * e4 * e7 * e7);
    const double t2 = 4725 * b32 *
                      (-200 * P(a, 5) * e5 - 1665 * P(a, 3) * b * e6 - 154 * a * a * b32 * e8 + 693 * a * b * b * e4 +
                       77 * b52 * e7);
    const double t3 =
        -30 * P(a, 3) * ep2 *
        (3392 * P(a, 5) * e4 * e5 * e7 - 336 * P(a, 4) * sb * (90 * e4 * e4 * e6 + 11 * e4 * e8 * e8 + 16 * e6 * e7 * e8) +
         16 * P(a, 3) * b * e4 * (2583 * e4 * e8 + 4910 * e6 * e7) -
         28 * a * a * b32 * (2889 * P(e4, 3) - 2122 * e4 * e7 * e8 + 699 * e6 * e7 * e7) -
         304164 * a * b * b * e4 * e4 * e7 - 63749 * b52 * e4 * e7 * e7);
    v[3] = pi * eps / (3225600 * P(a, 7) * sb) * (t1 + t2 + t3);
  }
  {
    const double K1 = pi * eps / (5529600 * P(a, 9) * pole);
    double s = -167157760 * P(a, 12) * P(e4, 4) * P(e7, 5) * ep8 +
               49116375 * std::pow(b, 4.5) *
                   (785 * P(a, 3) * e6 + 26 * a * a * sb * e8 - 117 * a * b * e4 - 13 * b32 * e7);
    s += -1536 * P(a, 9) * e7 * ep6 *
         (30 * P(a, 3) *
              (3339 * P(e4, 6) - 5322 * P(e4, 4) * e7 * e8 - 30950 * P(e4, 3) * e6 * e7 * e7 -
               2368 * e4 * e6 * P(e7, 3) * e8 + 1150 * e6 * e6 * P(e7, 4)) +
          a * a * sb * e4 * e4 * e7 * (-497277 * P(e4, 3) - 1966926 * e4 * e7 * e8 + 1228180 * e6 * e7 * e7) +
          3 * a * b * e4 * e7 * e7 * (3023193 * P(e4, 3) - 46000 * e6 * e7 * e7) + 1441191 * b32 * P(e4, 3) * P(e7, 3));
    s += -9450 * P(a, 3) * b32 * ep2 *
         (-400 * P(a, 6) * e6 * (3480 * e4 * e6 + 259 * e8 * e8) + 200 * P(a, 5) * sb * e6 * (8724 * e4 * e8 + 3595 * e6 * e7) +
          4 * P(a, 4) * b * (-260505 * e4 * e4 * e6 + 190248 * e4 * e8 * e8 + 313438 * e6 * e7 * e8) -
          12 * P(a, 3) * b32 * e4 * (689403 * e4 * e8 + 991486 * e6 * e7) +
          a * a * b * b * (20703519 * P(e4, 3) - 4172844 * e4 * e7 * e8 + 821669 * e6 * e7 * e7) +
          20955447 * a * b52 * e4 * e4 * e7 + 2440179 * P(b, 3) * e4 * e7 * e7);
    s += -240 * P(a, 6) * ep4 *
         (64 * P(a, 6) *
              (300 * e6 * e8 * (135 * P(e4, 3) + 46 * e6 * e7 * e7) - 14595 * e4 * e4 * e6 * e6 * e7 +
               4950 * e4 * e4 * P(e8, 3) + 9824 * e4 * e6 * e7 * e8 * e8) -
          48 * P(a, 5) * sb * e4 *
              (90 * e6 * (3465 * P(e4, 3) + 1208 * e6 * e7 * e7) + 111915 * e4 * e4 * e8 * e8 + 132626 * e4 * e6 * e7 * e8) +
          8 * P(a, 4) * b *
              (3018870 * P(e4, 4) * e8 - 3191031 * P(e4, 3) * e6 * e7 - 1556520 * e4 * e4 * e7 * e8 * e8 -
               2282296 * e4 * e6 * e7 * e7 * e8 + 833175 * e6 * e6 * P(e7, 3)) -
          24 * P(a, 3) * b32 *
              (640710 * P(e4, 5) - 5077425 * P(e4, 3) * e7 * e8 - 1778726 * e4 * e4 * e6 * e7 * e7 +
               220500 * e6 * P(e7, 3) * e8) +
          2 * a * a * b * b * e4 * e7 * (-126500049 * P(e4, 3) + 27457254 * e4 * e7 * e8 + 6865330 * e6 * e7 * e7) +
          9 * a * b52 * e7 * e7 * (1523760 * e6 * e7 * e7 - 23884957 * P(e4, 3)) + 11176158 * P(b, 3) * e4 * e4 * P(e7, 3));
    v[4] = K1 * s;
  }
  (void)e9;
  LyapunovSpectrum sp = gate(Regime::Aneg, eps, v);
  sp.v11_sign_surrogate = v11_sign_surrogate(c);
  return sp;
}

CanonicalApos impose_chain_apos(CanonicalApos c, int stage) {
  if (stage < 0 || stage > 5) throw std::invalid_argument("impose_chain_apos: stage must be in 0..5");
  const double a = c.a, b = c.b, e = c.eps, a2 = a * a, b2 = b * b, e2 = e * e;
  if (stage >= 5) c.dk(4) = 0.0;
  const double d4 = c.dk(4), d43 = d4 * d4 * d4;
  if (stage >= 4) c.dk(6) = 12.0 * a2 * b * d43 * e2 / (5.0 * (7.0 * b2 - 3.0 * a2 * a2 * d4 * d4 * e2));
  if (stage >= 1) c.dk(2) = -3.0 * d4;
  if (stage >= 2) c.dk(1) = -6.0 * b * d4 / a2 - 5.0 * c.dk(6);
  if (stage >= 3) c.dk(5) = 6.0 * d43 * e2 / 5.0 - 16.0 * b * c.dk(6) / a2;
  return c;
}

CanonicalAneg impose_chain_aneg(CanonicalAneg c, int stage) {
  if (stage < 0 || stage > 4) throw std::invalid_argument("impose_chain_aneg: stage must be in 0..4");
  const double a = c.a, b = c.b, sb = std::sqrt(b), b32 = b * sb, b52 = b * b * sb, ep2 = c.eps * c.eps,
               ep4 = ep2 * ep2;
  const double e4 = c.ek(4), e6 = c.ek(6), e7 = c.ek(7), e8 = c.ek(8);
  auto P = [](double x, int n) { return std::pow(x, n); };
  if (stage >= 1) c.ek(2) = -3.0 * (2.0 * a * e4 + sb * e7) / (2.0 * a);
  if (stage >= 2)
    c.ek(1) = (8 * P(a, 3) * e4 * e7 * e7 * ep2 - 60 * P(a, 3) * e6 - 30 * a * a * sb * e8 + 117 * a * b * e4 +
               15 * b32 * e7) /
              (12 * P(a, 3));
  if (stage >= 4) {
    const double num =
        122112 * P(a, 8) * P(e4, 4) * e7 * ep4 + 162816 * P(a, 8) * e4 * e4 * e7 * e7 * e8 * ep4 -
        67840 * P(a, 8) * e4 * e6 * P(e7, 3) * ep4 - 592704 * P(a, 7) * sb * P(e4, 3) * e7 * e7 * ep4 +
        907200 * P(a, 7) * sb * e4 * e4 * e6 * ep2 + 110880 * P(a, 7) * sb * e4 * e8 * e8 * ep2 +
        40320 * P(a, 7) * sb * e6 * P(e7, 4) * ep4 + 161280 * P(a, 7) * sb * e6 * e7 * e8 * ep2 +
        156224 * P(a, 6) * b * e4 * e4 * P(e7, 3) * ep4 - 1239840 * P(a, 6) * b * e4 * e4 * e8 * ep2 -
        2356800 * P(a, 6) * b * e4 * e6 * e7 * ep2 + 2426760 * P(a, 5) * b32 * P(e4, 3) * ep2 -
        1782480 * P(a, 5) * b32 * e4 * e7 * e8 * ep2 + 587160 * P(a, 5) * b32 * e6 * e7 * e7 * ep2 +
        9124920 * P(a, 4) * b * b * e4 * e4 * e7 * ep2 + 1912470 * P(a, 3) * b52 * e4 * e7 * e7 * ep2 -
        7867125 * P(a, 3) * b52 * e6 - 727650 * a * a * P(b, 3) * e8 + 3274425 * a * std::pow(b, 3.5) * e4 +
        363825 * P(b, 4) * e7;
    c.ek(5) = num / (120 * P(a, 5) * (848 * P(a, 3) * e4 * e7 * ep2 + 7875 * b32));
  }
  if (stage >= 3) {
    const double e5 = c.ek(5);
    c.ek(9) = (36 * P(a, 5) * P(e4, 3) * ep2 + 48 * P(a, 5) * e4 * e7 * e8 * ep2 - 30 * P(a, 5) * e5 -
               20 * P(a, 5) * e6 * e7 * e7 * ep2 - 252 * P(a, 4) * sb * e4 * e4 * e7 * ep2 -
               158 * P(a, 3) * b * e4 * e7 * e7 * ep2 + 1005 * P(a, 3) * b * e6 + 210 * a * a * b32 * e8 -
               945 * a * b * b * e4 - 105 * b52 * e7) /
              (105 * P(a, 4) * sb);
  }
  return c;
}

namespace {

template <class real>
struct PolarSeries {
  using SeriesState = std::array<real, kMaxSeriesOrder>;
  // Homogeneous parts P_k, Q_k of F1, F2 for k = 1..kMaxDegree.
  const PlanarField* f;
  int order;

  void operator()(const SeriesState& u, SeriesState& du, real theta) const {
    using std::cos;
    using std::sin;
    const real c = cos(theta), s = sin(theta);
    const int N = order;
    // rdot = sum_k A_k r^k, thetadot = sum_k B_{k-1} r^{k-1}.
    std::array<real, kMaxSeriesOrder + 2> A{}, B{}, v{};
    for (int k = 1; k <= kMaxDegree; ++k) {
      const real p = f->f1.homogeneous<real>(k, c, s), q = f->f2.homogeneous<real>(k, c, s);
      if (k <= N) A[static_cast<std::size_t>(k)] = c * p + s * q;
      if (k - 1 <= N) B[static_cast<std::size_t>(k - 1)] = c * q - s * p;
    }
    // dr/dtheta = A / B as a power series in r.
    for (int n = 0; n <= N; ++n) {
      real acc = A[static_cast<std::size_t>(n)];
      for (int m = 1; m <= n; ++m) acc -= B[static_cast<std::size_t>(m)] * v[static_cast<std::size_t>(n - m)];
      v[static_cast<std::size_t>(n)] = acc / B[0];
    }
    // r(theta) = sum_j u_j r0^j; accumulate sum_i v_i r^i in powers of r0.
    std::array<real, kMaxSeriesOrder + 1> U{}, Pw{}, next{};
    for (int j = 1; j <= N; ++j) U[static_cast<std::size_t>(j)] = u[static_cast<std::size_t>(j - 1)];
    Pw = U;
    du.fill(0);
    for (int i = 1; i <= N; ++i) {
      const real vi = v[static_cast<std::size_t>(i)];
      if (vi != 0)
        for (int n = i; n <= N; ++n) du[static_cast<std::size_t>(n - 1)] += vi * Pw[static_cast<std::size_t>(n)];
      if (i == N) break;
      next.fill(0);
      for (int p = i; p <= N; ++p) {
        if (Pw[static_cast<std::size_t>(p)] == 0) continue;
        for (int q = 1; p + q <= N; ++q)
          next[static_cast<std::size_t>(p + q)] += Pw[static_cast<std::size_t>(p)] * U[static_cast<std::size_t>(q)];
      }
      Pw = next;
    }
  }
};

template <class real>
std::array<double, kMaxSeriesOrder> integrate_series(const PlanarField& f, int order, int steps) {
  using SeriesState = typename PolarSeries<real>::SeriesState;
  const PolarSeries<real> sys{&f, order};
  SeriesState u{};
  u[0] = 1;
  odeint::runge_kutta_fehlberg78<SeriesState, real, SeriesState, real> rk;
  const real two_pi = boost::math::constants::two_pi<real>();
  const real h = two_pi / steps;
  real th = 0;
  for (int k = 0; k < steps; ++k) {
    rk.do_step(sys, u, th, h);
    th = two_pi * (k + 1) / steps;
  }
  std::array<double, kMaxSeriesOrder> out{};
  for (int i = 0; i < kMaxSeriesOrder; ++i) out[static_cast<std::size_t>(i)] = static_cast<double>(u[static_cast<std::size_t>(i)]);
  return out;
}

std::array<double, kMaxSeriesOrder> run_series(const PlanarField& f, int order, int steps, SeriesPrecision prec) {
  if (prec == SeriesPrecision::Quad) return integrate_series<boost::multiprecision::float128>(f, order, steps);
  return integrate_series<long double>(f, order, steps);
}

}  // namespace

ReturnSeries numeric_series(const PlanarField& f, int order, const SeriesOptions& opt) {
  if (order < 1 || order > kMaxSeriesOrder) throw std::invalid_argument("numeric_series: order must be in 1..12");
  if (!f.has_unit_rotation_linear_part())
    throw std::invalid_argument("numeric_series: linear part must be xdot = y, ydot = -x");
  if (opt.steps < 8) throw std::invalid_argument("numeric_series: steps must be >= 8");
  const auto coarse = run_series(f, order, opt.steps, opt.precision);
  const auto fine = run_series(f, order, 2 * opt.steps, opt.precision);
  ReturnSeries rs;
  rs.order = order;
  for (int i = 0; i < order; ++i) {
    rs.u.push_back(fine[static_cast<std::size_t>(i)]);
    rs.error_estimate =
        std::max(rs.error_estimate, std::abs(fine[static_cast<std::size_t>(i)] - coarse[static_cast<std::size_t>(i)]));
  }
  if (!(rs.error_estimate <= opt.tolerance))
    throw IntegrationError("numeric_series: step-halving error " + std::to_string(rs.error_estimate) +
                           " exceeds tolerance");
  return rs;
}

std::vector<double> default_fit_radii() {
  std::vector<double> r;
  for (int k = 0; k < 8; ++k) r.push_back(0.02 * std::pow(1.3, k));
  return r;
}

DisplacementFit displacement_fit(const PlanarField& f, const std::vector<double>& radii, const IntegratorConfig& cfg,
                                 int n_terms) {
  if (radii.size() < 6) throw std::invalid_argument("displacement_fit: need at least 6 radii");
  for (std::size_t k = 0; k < radii.size(); ++k) {
    if (!(radii[k] > 0.0) || radii[k] > 0.2) throw std::invalid_argument("displacement_fit: radii must lie in (0, 0.2]");
    if (k > 0 && !(radii[k] > radii[k - 1]))
      throw std::invalid_argument("displacement_fit: radii must be strictly increasing");
  }
  if (n_terms < 1 || n_terms >= static_cast<int>(radii.size()))
    throw std::invalid_argument("displacement_fit: n_terms must be in [1, radii - 1]");
  DisplacementFit fit;
  fit.radii = radii;
  const auto n = static_cast<Eigen::Index>(radii.size());
  Eigen::MatrixXd A(n, n_terms);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = radii[static_cast<std::size_t>(i)];
    const double d = poincare_return(f, r, cfg).displacement;  // EscapeError propagates
    fit.displacement.push_back(d);
    rhs(i) = d;
    for (int k = 0; k < n_terms; ++k) A(i, k) = std::pow(r, 2 * k + 3);
  }
  // Column scaling keeps the least-squares problem well conditioned.
  Eigen::VectorXd scale = A.colwise().norm().transpose();
  for (int k = 0; k < n_terms; ++k)
    if (scale(k) > 0) A.col(k) /= scale(k);
  Eigen::VectorXd x = A.colPivHouseholderQr().solve(rhs);
  fit.residual_norm = (A * x - rhs).norm();
  for (int k = 0; k < n_terms; ++k) fit.coefficients.push_back(x(k) / scale(k));
  return fit;
}

}  // namespace cycleforge
