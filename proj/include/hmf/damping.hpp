#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "hmf/errors.hpp"
#include "hmf/fit.hpp"
#include "hmf/parallel.hpp"
#include "hmf/spectral.hpp"
#include "hmf/volterra.hpp"

namespace hmf {

// ---------------------------------------------------------------- observables

// exp(-1/(1-s^2)), s = (h + M0/2)/(0.4 M0): a bump in h inside the eye.
inline double projection_weight(double h, double M0) {
  const double s = (h + 0.5 * M0) / (0.4 * M0);
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s * s));
}

// exp(kx (cos(x - x0) - 1) - (v - v0)^2 / (2 sv^2)), periodic in x.
inline Observable gaussian_bump(const std::string& name, double x0, double v0, double kx, double sv) {
  Observable o;
  o.name = name;
  o.p = 0;
  o.mu = std::numeric_limits<double>::infinity();
  o.f = [=](double x, double v) {
    const double dv = v - v0;
    return std::exp(kx * (std::cos(x - x0) - 1.0) - dv * dv / (2.0 * sv * sv));
  };
  return o;
}

// rho (X^2 - V^2) exp(-rho^2/2) with X = 2 sin(x/2), V = v/sqrt(M0),
// rho^2 = X^2 + V^2: even under (x,v) -> (-x,-v) and flat to second order.
inline Observable flat_cubic(double M0) {
  Observable o;
  o.name = "flat2";
  o.p = 2;
  o.mu = std::numeric_limits<double>::infinity();
  const double iv = 1.0 / std::sqrt(M0);
  o.f = [iv](double x, double v) {
    const double X2 = 2.0 * (1.0 - std::cos(x)), V = v * iv;
    const double r2 = X2 + V * V;
    return std::sqrt(r2) * (X2 - V * V) * std::exp(-0.5 * r2);
  };
  return o;
}

inline Observable energy_bump(double M0) {
  Observable o;
  o.name = "hbump";
  o.p = 0;
  o.mu = std::numeric_limits<double>::infinity();
  o.f = [M0](double x, double v) { return projection_weight(0.5 * v * v - M0 * std::cos(x), M0); };
  return o;
}

inline const std::vector<std::string>& observable_names() {
  static const std::vector<std::string> n{"bump", "bump2", "wide", "wide2", "flat2", "hbump", "vsin", "vcos"};
  return n;
}

inline Observable named_observable(const std::string& name, double M0) {
  if (name == "bump") return gaussian_bump("bump", 0.5, 0.3, 2.0, 0.7);
  if (name == "bump2") return gaussian_bump("bump2", -0.3, -0.2, 1.5, 0.8);
  if (name == "wide") return gaussian_bump("wide", 0.5, 0.3, 0.5, 1.2);
  if (name == "wide2") return gaussian_bump("wide2", -0.3, -0.2, 0.4, 1.4);
  if (name == "flat2") return flat_cubic(M0);
  if (name == "hbump") return energy_bump(M0);
  if (name == "vsin") return {"vsin", [](double x, double v) { return v * std::sin(x); }, 0, 1e9};
  if (name == "vcos") return {"vcos", [](double x, double v) { return v * std::cos(x); }, 0, 1e9};
  std::string known;
  for (const auto& k : observable_names()) known += (known.empty() ? "" : ", ") + k;
  throw ConfigError("unknown observable '" + name + "' (known: " + known + ")");
}

// ---------------------------------------------------------------- flatness

struct FlatnessReport {
  int declared = 0;
  std::vector<double> max_derivative;  // index n-1: largest |d^n f| over the mixed partials of order n
  double tol = 1e-6;
  bool holds = false;  // all orders 1..declared below tol
};

namespace detail {

inline const std::array<std::array<double, 5>, 5>& central_stencils() {
  static const std::array<std::array<double, 5>, 5> s{{{0, 0, 1, 0, 0},
                                                       {0, -0.5, 0, 0.5, 0},
                                                       {0, 1, -2, 1, 0},
                                                       {-0.5, 1, 0, -1, 0.5},
                                                       {1, -4, 6, -4, 1}}};
  return s;
}

// d^{i+j} f / dx^i dv^j at the origin, Richardson-extrapolated over three steps
// to remove the O(h) and O(h^2) terms.
inline double origin_derivative(const PhaseFunction& f, int i, int j, double h) {
  const auto& st = central_stencils();
  auto D = [&](double s) {
    double acc = 0.0;
    for (int a = 0; a < 5; ++a)
      for (int b = 0; b < 5; ++b) {
        const double w = st[i][a] * st[j][b];
        if (w != 0.0) acc += w * f((a - 2) * s, (b - 2) * s);
      }
    return acc / std::pow(s, i + j);
  };
  const double d1 = D(h), d2 = D(0.5 * h), d3 = D(0.25 * h);
  const double e1 = 2.0 * d2 - d1, e2 = 2.0 * d3 - d2;
  return (4.0 * e2 - e1) / 3.0;
}

}  // namespace detail

// Checks that all derivatives of orders 1..p vanish at the eye centre, and
// records the size of the order p+1 derivatives.
inline FlatnessReport verify_flatness(const PhaseFunction& f, int p, double tol = 1e-6) {
  if (p < 0 || p > 3) throw ConfigError("flatness order must lie in 0..3");
  FlatnessReport r;
  r.declared = p;
  r.tol = tol;
  r.holds = true;
  for (int n = 1; n <= p + 1; ++n) {
    const double h = n <= 2 ? 4e-3 : 2e-2;
    double m = 0.0;
    for (int i = 0; i <= n; ++i) m = std::max(m, std::abs(detail::origin_derivative(f, i, n - i, h)));
    r.max_derivative.push_back(m);
    if (n <= p && !(m < tol)) r.holds = false;
  }
  return r;
}

// ---------------------------------------------------------------- projection

// sum over charts of int C_0 (f)_0 da
inline double orthogonality_defect(const SpectralTable& T, const std::string& f) {
  return limit_functional(T, f, "cos");
}

struct ProjectionResult {
  std::string source, name;
  double c = 0.0;
  double overlap = 0.0;  // sum int C_0 w da
  double defect_before = 0.0, defect_after = 0.0;
};

// Adds the observable r0 - c w(h0) to the table, with c chosen so that the
// new rows satisfy sum int C_0 (r0)_0 da = 0.  Only the l = 0 rows change.
inline ProjectionResult orthogonal_projection(SpectralTable& T, const std::string& r0, std::string name = "") {
  const int k = T.observable_index(r0);
  if (k < 0) throw MisuseError("orthogonal_projection: no rows for '" + r0 + "'");
  if (name.empty()) name = r0 + "_perp";
  const double M0 = T.M0;
  ProjectionResult pr;
  pr.source = r0;
  pr.name = name;
  pr.defect_before = orthogonality_defect(T, r0);
  pr.overlap = table_integral(T, [&](const ChartTable& ct, int j) { return ct.C[j][0] * projection_weight(ct.levels[j].h, M0); });
  const double cc = table_integral(T, [](const ChartTable& ct, int j) { return ct.C[j][0] * ct.C[j][0]; });
  const double ww = table_integral(T, [&](const ChartTable& ct, int j) {
    const double w = projection_weight(ct.levels[j].h, M0);
    return w * w;
  });
  if (!(std::abs(pr.overlap) > 1e-12 * std::sqrt(cc * ww))) {
    std::ostringstream os;
    os << "orthogonal_projection: reference direction has overlap " << pr.overlap << " with C_0";
    throw ProjectionError(os.str());
  }
  const double scale = table_integral(T, [&](const ChartTable& ct, int j) { return std::abs(ct.C[j][0] * ct.obs[k][j][0].real()); });
  pr.c = std::abs(pr.defect_before) <= 1e-14 * scale ? 0.0 : pr.defect_before / pr.overlap;

  Observable o = T.observables[k];
  const PhaseFunction base = o.f;
  const double c = pr.c;
  o.name = name;
  o.f = [base, c, M0](double x, double v) { return base(x, v) - c * projection_weight(0.5 * v * v - M0 * std::cos(x), M0); };
  const int existing = T.observable_index(name);
  const int slot = existing >= 0 ? existing : static_cast<int>(T.observables.size());
  if (existing >= 0)
    T.observables[slot] = o;
  else
    T.observables.push_back(o);
  for (auto& ct : T.charts) {
    if (static_cast<int>(ct.obs.size()) <= slot) ct.obs.resize(slot + 1);
    ct.obs[slot] = ct.obs[k];
    for (int j = 0; j < ct.nodes(); ++j) ct.obs[slot][j][0] -= c * projection_weight(ct.levels[j].h, M0);
  }
  pr.defect_after = orthogonality_defect(T, name);
  return pr;
}

// ---------------------------------------------------------------- damping

struct DampingConfig {
  double dt = 0.05;
  double T = 200.0;
  Window window{20.0, 200.0};
  double envelope = 0.0;  // RMS window width; 0 selects one eye-centre period 2 pi / sqrt(M0)
  int p = 0;
  double tol_C = 0.5;
  double tol_S = 0.3;
};

inline double default_envelope(double M0) { return 2.0 * pi / std::sqrt(M0); }

struct DampingReport {
  int p = 0;
  DampingConfig config;
  std::vector<double> t, C, S, F_C, F_S;
  RateFit fit_C, fit_S, fit_FC, fit_FS;
  double target_C = 0.0, target_S = -2.0;
  bool pass_C = false, pass_S = false, hierarchy = false, pass = false;
  double ortho_before = 0.0, ortho_after = 0.0;
  double ortho_max_along_run = 0.0;  // max over t of |sum int C_0 g_0(t) da|
  double volterra_residual = 0.0;
  double resolvent_gap = 0.0;  // max |C_direct - (F_C - R*F_C)|
  bool has_penrose = false;
  double penrose_min_c = 0.0, penrose_min_s = 0.0;
  bool penrose_pass = false;
};

inline double damping_target_C(int p) { return -std::max(3.0, 0.5 * (p + 5)); }

// Evolves the angle averages: since {eta, cos X} and {eta, sin X} have
// vanishing angle average, g_0 is constant in time up to quadrature error.
inline double conserved_average_drift(const SpectralTable& T, const std::vector<double>& C, const std::vector<double>& S,
                                      double dt, double defect0) {
  double ap = 0.0, aq = 0.0;
  for (const auto& ct : T.charts) {
    std::vector<double> p0(ct.nodes()), q0(ct.nodes());
    for (int j = 0; j < ct.nodes(); ++j) {
      const auto fs = angle_fourier(ct.levels[j], [](double x, double v) { return v * std::sin(x); }, 0, 256);
      const auto fc = angle_fourier(ct.levels[j], [](double x, double v) { return v * std::cos(x); }, 0, 256);
      p0[j] = ct.gprime[j] * fs[0].real();
      q0[j] = -ct.gprime[j] * fc[0].real();
    }
    ap += chart_integral(ct, [&](int j) { return ct.C[j][0] * p0[j]; });
    aq += chart_integral(ct, [&](int j) { return ct.C[j][0] * q0[j]; });
  }
  double ic = 0.0, is = 0.0, worst = std::abs(defect0);
  for (std::size_t i = 1; i < C.size(); ++i) {
    ic += 0.5 * dt * (C[i] + C[i - 1]);
    is += 0.5 * dt * (S[i] + S[i - 1]);
    worst = std::max(worst, std::abs(defect0 + ic * ap + is * aq));
  }
  return worst;
}

inline DampingReport linear_damping_run(const SpectralTable& T, const std::string& r0, const DampingConfig& cfg,
                                        const PenroseScan* penrose = nullptr, const ProjectionResult* projection = nullptr) {
  if (!(cfg.window.t0 > 0.0 && cfg.window.t1 > cfg.window.t0 && cfg.window.t1 <= cfg.T + 1e-12))
    throw ConfigError("damping: fit window must satisfy 0 < t0 < t1 <= T");
  DampingReport rep;
  rep.p = cfg.p;
  rep.config = cfg;
  if (penrose) {
    rep.has_penrose = true;
    rep.penrose_min_c = penrose->min_c;
    rep.penrose_min_s = penrose->min_s;
    rep.penrose_pass = penrose->pass;
    if (!penrose->pass) throw PreconditionError("linear_damping_run: the Penrose scan did not pass for this state");
  }
  const TimeGrid grid(cfg.dt, cfg.T);
  const auto ks = kernel_series(T, grid);
  const auto src = source_series(T, r0, grid);
  rep.t = ks.t;
  rep.F_C = src.F_C;
  rep.F_S = src.F_S;
  const auto yc = solve_volterra(ks.K_C, src.F_C, cfg.dt);
  const auto ys = solve_volterra(ks.K_S, src.F_S, cfg.dt);
  rep.C = yc.y;
  rep.S = ys.y;
  rep.volterra_residual = std::max(yc.max_residual, ys.max_residual);

  const auto R = resolvent_kernel(ks.K_C, cfg.dt);
  const auto yr = solve_with_resolvent(R, src.F_C, cfg.dt);
  for (std::size_t i = 0; i < yr.size(); ++i) rep.resolvent_gap = std::max(rep.resolvent_gap, std::abs(yr[i] - rep.C[i]));

  rep.ortho_before = projection ? projection->defect_before : orthogonality_defect(T, r0);
  rep.ortho_after = orthogonality_defect(T, r0);
  rep.ortho_max_along_run = conserved_average_drift(T, rep.C, rep.S, cfg.dt, rep.ortho_after);

  const double W = cfg.envelope > 0.0 ? cfg.envelope : default_envelope(T.M0);
  rep.fit_C = fit_envelope_rate(rep.t, rep.C, cfg.window, W);
  rep.fit_S = fit_envelope_rate(rep.t, rep.S, cfg.window, W);
  rep.fit_FC = fit_envelope_rate(rep.t, rep.F_C, cfg.window, W);
  rep.fit_FS = fit_envelope_rate(rep.t, rep.F_S, cfg.window, W);
  rep.target_C = damping_target_C(cfg.p);
  rep.target_S = -2.0;
  rep.pass_C = std::abs(rep.fit_C.slope - rep.target_C) <= cfg.tol_C;
  rep.pass_S = std::abs(rep.fit_S.slope - rep.target_S) <= cfg.tol_S;
  rep.hierarchy = rep.fit_C.slope <= rep.fit_S.slope;
  rep.pass = rep.pass_C && rep.pass_S && std::abs(rep.ortho_after) < 1e-8 && rep.ortho_max_along_run < 1e-8;
  return rep;
}

// ---------------------------------------------------------------- dispersion

inline double dispersion_pairing(const SpectralTable& T, const std::string& f, const std::string& phi, double t) {
  return pairing_series(T, f, phi)(t);
}

struct DispersionResult {
  std::string f, phi;
  int p = 0, q = 0;
  std::vector<double> t, pairing;
  double limit = 0.0;
  RateFit fit;
  double target = 0.0, tol = 0.0;
  bool monotone_maxima = false;
  bool pass = false;
};

// Maxima of |y| over consecutive blocks of width B inside the window must not increase.
inline bool block_maxima_decrease(const std::vector<double>& t, const std::vector<double>& y, Window w, double B) {
  double prev = std::numeric_limits<double>::infinity(), cur = 0.0, edge = w.t0 + B;
  bool any = false;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < w.t0 || t[i] > w.t1) continue;
    if (t[i] > edge) {
      if (cur > prev) return false;
      prev = cur;
      cur = 0.0;
      edge += B;
    }
    cur = std::max(cur, std::abs(y[i]));
    any = true;
  }
  return any;
}

inline DispersionResult dispersion_experiment(const SpectralTable& T, const std::string& f, const std::string& phi, int p,
                                              int q, const TimeGrid& grid, Window w, double envelope = 0.0,
                                              double tol = 0.3) {
  DispersionResult r;
  r.f = f;
  r.phi = phi;
  r.p = p;
  r.q = q;
  const auto pb = pairing_bank(T, f, {phi});
  r.t = grid.nodes();
  r.pairing = pb.series(r.t)[0];
  r.limit = pb.constants[0];
  std::vector<double> dev(r.t.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = r.pairing[i] - r.limit;
  const double W = envelope > 0.0 ? envelope : default_envelope(T.M0);
  r.fit = fit_envelope_rate(r.t, dev, w, W);
  r.target = -(0.5 * (p + q) + 2.0);
  r.tol = tol;
  r.monotone_maxima = block_maxima_decrease(r.t, dev, w, 2.0 * W);
  r.pass = std::abs(r.fit.slope - r.target) <= tol;
  return r;
}

// ---------------------------------------------------------------- scattering

struct ScatterConfig {
  int n_theta = 64;
  int lmax = 24;
  int n_phi = 1024;
  int n_samples = 48;
  Window window{20.0, 200.0};
  double target = -1.0, tol = 0.3;
};

struct ScatteringChart {
  Chart chart = Chart::Eye;
  std::vector<double> h, omega, action;
  std::vector<std::vector<double>> g_inf;  // [node][theta]
  std::vector<double> r_inf;               // angle average of r0, a function of h
};

struct ScatteringResult {
  int n_theta = 0;
  std::vector<ScatteringChart> charts;
  std::vector<double> t_sample;
  std::vector<double> majorant;  // int_t^inf ||d_s g||_1 ds
  std::vector<double> distance;  // ||g(t) - g_inf||_1 on the (theta, a) grid, the fitted surrogate
  RateFit majorant_fit, distance_fit;
  double tail_amplitude = 0.0;  // A in ||d_s g||_1 ~ A / s^2 beyond the run
  double tail_bound = 0.0;      // A / T, bound on the part of g_inf omitted beyond T
  double rinf_theta_variance = 0.0;
  double weak_limit_cos = 0.0;  // sum int (r0)_0 C_0 da
  double final_C = 0.0;
  bool pass = false;
};

namespace detail {

// Quartic interpolation of node values at frequency w on a chart.
template <class F>
double chart_interpolate(const ChartTable& ct, F&& value, double w) {
  const int np = ct.panels();
  int lo = 0, hi = np - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (ct.omega[4 * mid + 4] < w)
      lo = mid + 1;
    else
      hi = mid;
  }
  std::array<double, 5> y{};
  for (int i = 0; i < 5; ++i) y[i] = value(4 * lo + i);
  const auto c = osc::monomial_coeffs(y.data());
  return std::real(osc::horner(c, cplx((w - ct.panel_center(lo)) / ct.panel_half(lo))));
}

}  // namespace detail

inline ScatteringResult scattering_state(const SpectralTable& T, const DampingReport& rep, const std::string& r0,
                                         const ScatterConfig& cfg = {}) {
  if (rep.t.size() < 3) throw PreconditionError("scattering_state: empty damping run");
  if (!(rep.fit_C.slope < -1.0 && rep.fit_S.slope < -1.0)) {
    std::ostringstream os;
    os << "scattering_state: C, S tails not integrable (slopes " << rep.fit_C.slope << ", " << rep.fit_S.slope << ")";
    throw PreconditionError(os.str());
  }
  const int k = T.observable_index(r0);
  if (k < 0) throw MisuseError("scattering_state: no rows for '" + r0 + "'");
  if (rep.t.back() < 1.5 * cfg.window.t1) {
    std::ostringstream os;
    os << "scattering_state: the damping run must extend to 1.5 t1 = " << 1.5 * cfg.window.t1 << " (got T = " << rep.t.back() << ")";
    throw PreconditionError(os.str());
  }
  if (cfg.n_theta < 2 * cfg.lmax + 2) throw ConfigError("scatter: need n_theta >= 2 lmax + 2");
  const int lmax = std::min(cfg.lmax, T.L());
  const int nth = cfg.n_theta;
  const double dt = rep.config.dt, Tend = rep.t.back();
  const std::size_t n = rep.t.size();
  const PhaseFunction& f0 = T.observables[k].f;

  ScatteringResult res;
  res.n_theta = nth;
  res.final_C = rep.C.back();
  res.weak_limit_cos = limit_functional(T, r0, "cos");

  // sample times, log-spaced in the window and snapped to the grid
  std::vector<std::size_t> idx;
  for (int s = 0; s < cfg.n_samples; ++s) {
    const double tt = cfg.window.t0 * std::pow(cfg.window.t1 / cfg.window.t0, double(s) / (cfg.n_samples - 1));
    const std::size_t i = std::min(n - 1, static_cast<std::size_t>(std::llround(tt / dt)));
    if (idx.empty() || i != idx.back()) idx.push_back(i);
  }
  for (auto i : idx) res.t_sample.push_back(rep.t[i]);
  std::vector<double> dist(idx.size(), 0.0);

  // ||d_s g||_1 = N(C(s), S(s)) with N(C, S) = r n(phi) tabulated over phi in [0, pi)
  std::vector<double> nphi(cfg.n_phi, 0.0);
  std::vector<std::vector<cplx>> wave(nth, std::vector<cplx>(lmax + 1));
  for (int m = 0; m < nth; ++m)
    for (int l = 0; l <= lmax; ++l) wave[m][l] = std::polar(1.0, l * (-pi + 2.0 * pi * m / nth));

  for (const auto& ct : T.charts) {
    const int nn = ct.nodes();
    ScatteringChart sc;
    sc.chart = ct.chart;
    sc.h.resize(nn);
    sc.omega = ct.omega;
    sc.action.resize(nn);
    sc.g_inf.assign(nn, std::vector<double>(nth, 0.0));
    sc.r_inf.resize(nn);
    std::vector<std::vector<double>> dnode(nn, std::vector<double>(idx.size(), 0.0));
    std::vector<std::vector<double>> nphi_node(nn, std::vector<double>(cfg.n_phi, 0.0));

    parallel_for(static_cast<std::size_t>(nn), [&](std::size_t jj) {
      const int j = static_cast<int>(jj);
      const Level& lv = ct.levels[j];
      sc.h[j] = lv.h;
      sc.action[j] = lv.action;
      sc.r_inf[j] = ct.obs[k][j][0].real();
      std::vector<CartesianEval> pts(nth);
      for (int m = 0; m < nth; ++m) pts[m] = cartesian(lv, -pi + 2.0 * pi * m / nth);
      const double gp = ct.gprime[j], w = ct.omega[j];
      for (int q = 0; q < cfg.n_phi; ++q) {
        const double ph = pi * q / cfg.n_phi, cp = std::cos(ph), sp = std::sin(ph);
        double acc = 0.0;
        for (int m = 0; m < nth; ++m) acc += std::abs(pts[m].v * (cp * pts[m].sin_x - sp * pts[m].cos_x));
        nphi_node[j][q] = std::abs(gp) * acc / nth;
      }
      // d_l(t) = i l w G' int_t^inf (C(s) C_l + S(s) S_l) e^{i l w s} ds, cumulated backwards
      std::vector<std::vector<cplx>> d(idx.size(), std::vector<cplx>(lmax + 1));
      std::vector<cplx> d0(lmax + 1);
      for (int l = 1; l <= lmax; ++l) {
        const cplx cl = ct.cos_coef(j, l), sl = ct.sin_coef(j, l);
        if (std::abs(cl) + std::abs(sl) == 0.0 || gp == 0.0) continue;
        const cplx rot = std::polar(1.0, l * w * dt);
        cplx e = std::polar(1.0, l * w * Tend);
        const cplx irot = std::conj(rot);
        cplx acc = 0.0;
        cplx prev = (rep.C[n - 1] * cl + rep.S[n - 1] * sl) * e;
        std::size_t next = idx.size();
        while (next > 0 && idx[next - 1] >= n - 1) --next;
        const cplx fac = cplx(0.0, l * w * gp);
        for (std::size_t i = n - 1; i-- > 0;) {
          e *= irot;
          const cplx cur = (rep.C[i] * cl + rep.S[i] * sl) * e;
          acc += 0.5 * dt * (cur + prev);
          prev = cur;
          while (next > 0 && idx[next - 1] == i) {
            d[next - 1][l] = fac * acc;
            --next;
          }
        }
        d0[l] = fac * acc;
      }
      for (int m = 0; m < nth; ++m) {
        double corr = 0.0;
        for (int l = 1; l <= lmax; ++l) corr += 2.0 * std::real(d0[l] * wave[m][l]);
        sc.g_inf[j][m] = f0(pts[m].x, pts[m].v) - corr;
      }
      for (std::size_t s = 0; s < idx.size(); ++s) {
        double acc = 0.0;
        for (int m = 0; m < nth; ++m) {
          double val = 0.0;
          for (int l = 1; l <= lmax; ++l) val += 2.0 * std::real(d[s][l] * wave[m][l]);
          acc += std::abs(val);
        }
        dnode[j][s] = acc / nth;
      }
    });
    for (std::size_t s = 0; s < idx.size(); ++s) dist[s] += chart_integral(ct, [&](int j) { return dnode[j][s]; });
    for (int q = 0; q < cfg.n_phi; ++q) nphi[q] += chart_integral(ct, [&](int j) { return nphi_node[j][q]; });

    // r_inf rebuilt from (x, v) by classification and interpolation in omega
    double var = 0.0;
    const double eps = 0.5 * T.cfg.eps_sep;
    for (int j = 0; j < nn; ++j) {
      const Level& lv = ct.levels[j];
      if (std::abs(lv.offset) <= 2.0 * eps * T.M0 || (lv.chart == Chart::Eye && lv.md.m == 0.0)) continue;
      double mean = 0.0, sq = 0.0;
      for (int m = 0; m < nth; ++m) {
        const auto p = to_cartesian(lv, -pi + 2.0 * pi * m / nth);
        const auto cl = classify(p, T.M0, eps);
        const auto& tgt = T.chart(cl.chart);
        const double w = level(cl.chart, T.M0, cl.h).omega;
        const double val = detail::chart_interpolate(tgt, [&](int i) { return tgt.obs[k][i][0].real(); }, w);
        mean += val;
        sq += val * val;
      }
      mean /= nth;
      var = std::max(var, std::max(0.0, sq / nth - mean * mean));
    }
    res.rinf_theta_variance = std::max(res.rinf_theta_variance, var);
    res.charts.push_back(std::move(sc));
  }
  res.distance = dist;

  // majorant: int_t^T N ds + A / T with A the mean of s^2 N(s) over [T/2, T]
  auto Nof = [&](double C, double S) {
    const double r = std::hypot(C, S);
    if (r == 0.0) return 0.0;
    double ph = std::atan2(S, C);
    if (ph < 0.0) ph += pi;
    if (ph >= pi) ph -= pi;
    const double x = ph / pi * cfg.n_phi;
    const int i0 = static_cast<int>(x) % cfg.n_phi;
    const int i1 = (i0 + 1) % cfg.n_phi;
    const double fr = x - std::floor(x);
    return r * ((1.0 - fr) * nphi[i0] + fr * nphi[i1]);
  };
  std::vector<double> N(n);
  for (std::size_t i = 0; i < n; ++i) N[i] = Nof(rep.C[i], rep.S[i]);
  double A = 0.0;
  int cnt = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (rep.t[i] >= 0.5 * Tend) {
      A += rep.t[i] * rep.t[i] * N[i];
      ++cnt;
    }
  res.tail_amplitude = cnt ? A / cnt : 0.0;
  std::vector<double> M(n, 0.0);
  M[n - 1] = res.tail_amplitude / Tend;
  for (std::size_t i = n - 1; i-- > 0;) M[i] = M[i + 1] + 0.5 * dt * (N[i] + N[i + 1]);
  for (auto i : idx) res.majorant.push_back(M[i]);

  res.majorant_fit = fit_algebraic_rate(res.t_sample, res.majorant, cfg.window);
  res.distance_fit = fit_algebraic_rate(res.t_sample, res.distance, cfg.window);
  res.tail_bound = res.tail_amplitude / Tend;
  res.pass = std::abs(res.distance_fit.slope - cfg.target) <= cfg.tol && res.rinf_theta_variance < 1e-6;
  return res;
}

// ---------------------------------------------------------------- half-power integral

// I(t) = int_0^X u^{-1/2} e^{i t u} du = 2 int_0^{sqrt X} e^{i t s^2} ds, composite
// 20-point Gauss-Legendre with about one panel per unit of phase.
inline cplx half_power_oscillatory(double t, double X, int refine = 1) {
  if (!(t >= 0.0) || !(X > 0.0)) throw DomainError("half_power_oscillatory needs t >= 0 and X > 0");
  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& xs = GL::abscissa();
  const auto& ws = GL::weights();
  const double Y = std::sqrt(X);
  const int panels = std::max(1, refine) * (4 + static_cast<int>(std::ceil(t * X)));
  const double hw = 0.5 * Y / panels;
  cplx s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double c = (2 * p + 1) * hw;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (double sg : {1.0, -1.0}) {
        if (sg < 0.0 && xs[i] == 0.0) continue;
        const double u = c + sg * hw * xs[i];
        s += ws[i] * std::polar(1.0, t * u * u);
      }
    }
  }
  return 2.0 * hw * s;
}

struct HalfPowerSup {
  double sup = 0.0, sup_refined = 0.0, t_at = 0.0;
  double rel_change = 0.0;
  bool pass = false;
};

// sup of sqrt(t) |I(t)| over log-spaced t, at two quadrature resolutions.
inline HalfPowerSup half_power_sup(double X = 1.0, double t0 = 1.0, double t1 = 1e4, int n_t = 401) {
  HalfPowerSup r;
  for (int i = 0; i < n_t; ++i) {
    const double t = t0 * std::pow(t1 / t0, double(i) / (n_t - 1));
    const double a = std::sqrt(t) * std::abs(half_power_oscillatory(t, X, 1));
    const double b = std::sqrt(t) * std::abs(half_power_oscillatory(t, X, 2));
    if (a > r.sup) {
      r.sup = a;
      r.t_at = t;
    }
    r.sup_refined = std::max(r.sup_refined, b);
  }
  r.rel_change = std::abs(r.sup_refined - r.sup) / r.sup;
  r.pass = std::isfinite(r.sup) && r.rel_change < 0.01;
  return r;
}

}  // namespace hmf
