#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "hmf/errors.hpp"
#include "hmf/spectral.hpp"

namespace hmf {

struct TimeGrid {
  double dt = 0.05;
  double T = 200.0;
  static constexpr std::size_t max_steps = 10'000'000;

  TimeGrid() = default;
  TimeGrid(double dt_, double T_) : dt(dt_), T(T_) {
    if (!(dt > 0.0 && T > 0.0)) throw ConfigError("time grid needs dt > 0 and T > 0");
    if (T / dt > double(max_steps)) throw ConfigError("time grid too long");
  }
  std::size_t size() const { return static_cast<std::size_t>(std::llround(T / dt)) + 1; }
  double t(std::size_t n) const { return n * dt; }
  std::vector<double> nodes() const {
    std::vector<double> v(size());
    for (std::size_t n = 0; n < v.size(); ++n) v[n] = t(n);
    return v;
  }
};

// Spectral kernels of the linearized problem.  With A_l = G' |C_l|^2 da/domega
// (and B_l the same with S_l):
//   Q_C(t) =  2 Re sum_l int A_l e^{-i l w t} dw,  K_C = Q_C',
//   Q_S(t) = -2 Re sum_l int B_l e^{-i l w t} dw,  K_S = Q_S'.
struct KernelOperators {
  OscillatorySum qc, qs;  // amplitudes A_l, B_l
  OscillatorySum kc, ks;  // amplitudes l w A_l, l w B_l

  double Q_C(double t) const { return 2.0 * std::real(qc(t)); }
  double Q_S(double t) const { return -2.0 * std::real(qs(t)); }
  double K_C(double t) const { return 2.0 * std::imag(kc(t)); }
  double K_S(double t) const { return -2.0 * std::imag(ks(t)); }
};

inline OscillatoryBank kernel_bank(const SpectralTable& T);

inline KernelOperators kernel_operators(const SpectralTable& T) {
  const auto bank = kernel_bank(T);
  return {bank.sum(0), bank.sum(1), bank.sum(2), bank.sum(3)};
}

struct KernelSeries {
  TimeGrid grid;
  std::vector<double> t, K_C, K_S, Q_C, Q_S;
  double Q0 = 0.0;  // sum over charts of int G' C_0^2 da
};

inline OscillatoryBank kernel_bank(const SpectralTable& T) {
  if (!T.has_profile) throw MisuseError("kernels need a table built with the profile derivative");
  if (T.max_tail > 1e-8) {
    std::ostringstream os;
    os << "kernel truncation: coefficient tail " << T.max_tail << " above 1e-8";
    throw TruncationError(os.str());
  }
  auto a = [](const ChartTable& ct, int j, int l) { return cplx(ct.gprime[j] * ct.C[j][l] * ct.C[j][l] * ct.dadw[j]); };
  auto b = [](const ChartTable& ct, int j, int l) { return cplx(ct.gprime[j] * ct.Sr[j][l] * ct.Sr[j][l] * ct.dadw[j]); };
  return make_oscillatory_bank(T, 1, T.L(),
                               {a, b, [a](const ChartTable& ct, int j, int l) { return a(ct, j, l) * (l * ct.omega[j]); },
                                [b](const ChartTable& ct, int j, int l) { return b(ct, j, l) * (l * ct.omega[j]); }});
}

inline KernelSeries kernel_series(const SpectralTable& T, const TimeGrid& grid) {
  const auto bank = kernel_bank(T);
  KernelSeries ks;
  ks.grid = grid;
  ks.t = grid.nodes();
  const auto z = bank.series(ks.t);
  const std::size_t n = ks.t.size();
  ks.K_C.resize(n);
  ks.K_S.resize(n);
  ks.Q_C.resize(n);
  ks.Q_S.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ks.Q_C[i] = 2.0 * std::real(z[0][i]);
    ks.Q_S[i] = -2.0 * std::real(z[1][i]);
    ks.K_C[i] = i == 0 ? 0.0 : 2.0 * std::imag(z[2][i]);
    ks.K_S[i] = i == 0 ? 0.0 : -2.0 * std::imag(z[3][i]);
  }
  ks.Q0 = table_integral(T, [](const ChartTable& ct, int j) { return ct.gprime[j] * ct.C[j][0] * ct.C[j][0]; });
  return ks;
}

struct SourceSeries {
  std::vector<double> t, F_C, F_S;
};

inline SourceSeries source_series(const SpectralTable& T, const std::string& r0, const TimeGrid& grid) {
  const auto pb = pairing_bank(T, r0, {"cos", "sin"});
  SourceSeries s;
  s.t = grid.nodes();
  auto v = pb.series(s.t);
  s.F_C = std::move(v[0]);
  s.F_S = std::move(v[1]);
  return s;
}

struct VolterraSolution {
  double dt = 0.0;
  std::vector<double> y, F;
  std::vector<double> residual;  // per-step relative residual of the discrete equation
  double max_residual = 0.0;
};

// y(t) = F(t) + int_0^t K(t-s) y(s) ds by the product trapezoid rule.
inline VolterraSolution solve_volterra(const std::vector<double>& K, const std::vector<double>& F, double dt) {
  if (K.size() != F.size()) throw MisuseError("solve_volterra: kernel and source lengths differ");
  if (!(dt > 0.0)) throw MisuseError("solve_volterra: dt must be positive");
  const std::size_t n = F.size();
  VolterraSolution sol;
  sol.dt = dt;
  sol.F = F;
  sol.y.assign(n, 0.0);
  sol.residual.assign(n, 0.0);
  if (n == 0) return sol;
  const double diag = 1.0 - 0.5 * dt * K[0];
  if (std::abs(diag) < 1e-8) throw StabilityError("solve_volterra: step denominator 1 - dt K(0)/2 nearly vanishes");
  sol.y[0] = F[0];
  for (std::size_t i = 1; i < n; ++i) {
    double acc = 0.5 * K[i] * sol.y[0];
    for (std::size_t j = 1; j < i; ++j) acc += K[i - j] * sol.y[j];
    const double rhs = F[i] + dt * acc;
    sol.y[i] = rhs / diag;
    const double res = sol.y[i] - F[i] - dt * (acc + 0.5 * K[0] * sol.y[i]);
    const double scale = std::max({std::abs(sol.y[i]), std::abs(F[i]), std::abs(dt * acc), 1e-300});
    sol.residual[i] = std::abs(res) / scale;
    sol.max_residual = std::max(sol.max_residual, sol.residual[i]);
  }
  return sol;
}

// R = -K + K*R.
inline std::vector<double> resolvent_kernel(const std::vector<double>& K, double dt) {
  std::vector<double> mk(K.size());
  for (std::size_t i = 0; i < K.size(); ++i) mk[i] = -K[i];
  return solve_volterra(K, mk, dt).y;
}

// Trapezoid approximation of (A*B)(t_n) = int_0^t A(t-s) B(s) ds.
inline std::vector<double> convolve_trapezoid(const std::vector<double>& A, const std::vector<double>& B, double dt) {
  const std::size_t n = std::min(A.size(), B.size());
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    double s = 0.5 * (A[i] * B[0] + A[0] * B[i]);
    for (std::size_t j = 1; j < i; ++j) s += A[i - j] * B[j];
    out[i] = dt * s;
  }
  return out;
}

// y = F - R*F
inline std::vector<double> solve_with_resolvent(const std::vector<double>& R, const std::vector<double>& F, double dt) {
  auto c = convolve_trapezoid(R, F, dt);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = F[i] - c[i];
  return c;
}

// Transform K^(xi) = int_0^inf K(t) e^{-i t xi} dt from the spectral sums:
// K^(xi) = sum_l [ -2 int A_l + (xi/l)(Cauchy(A_l, xi/l) - Cauchy(A_l, -xi/l)) ]
// with A_l = G'|C_l|^2 da/dw for C and -G'|S_l|^2 da/dw for S.
struct HatKernel {
  const OscillatorySum* amp;
  double sign;  // +1 for C, -1 for S
  std::vector<std::pair<double, double>> chart_ranges;

  cplx operator()(cplx xi) const {
    if (xi.imag() > 0.0) throw DomainError("hat kernel defined for Im xi <= 0");
    const cplx total = amp->total();
    if (xi == cplx(0.0)) return sign * (-2.0 * total);
    if (xi.imag() == 0.0) {
      for (const auto& b : amp->blocks) {
        const double z = xi.real() / b.l;
        for (double zz : {z, -z})
          if (zz >= b.center - b.half && zz <= b.center + b.half) {
            std::ostringstream os;
            os << "resonance: real xi = " << xi.real() << " equals l*omega for l=" << b.l << " near omega=" << zz;
            throw ResonanceError(os.str(), b.l, zz);
          }
      }
    }
    cplx s = -2.0 * total;
    for (const auto& b : amp->blocks) {
      const cplx z = xi / double(b.l);
      s += z * (osc::cauchy_panel(b.coef, b.center, b.half, z) - osc::cauchy_panel(b.coef, b.center, b.half, -z));
    }
    return sign * s;
  }
};

struct HatKernels {
  KernelOperators op;
  HatKernel C() const { return {&op.qc, 1.0, {}}; }
  HatKernel S() const { return {&op.qs, -1.0, {}}; }
};

inline cplx hat_kernel_C(const KernelOperators& op, cplx xi) { return HatKernel{&op.qc, 1.0, {}}(xi); }
inline cplx hat_kernel_S(const KernelOperators& op, cplx xi) { return HatKernel{&op.qs, -1.0, {}}(xi); }

struct PenroseConfig {
  int n_gamma = 121;
  int n_tau = 30;
  double tau_min = 1e-3;
  double B = 0.0;        // 0: automatic
  double tau_max = 0.0;  // 0: automatic (= B)
};

struct PenroseNode {
  double re, im, abs_c, abs_s;
};

struct PenroseScan {
  std::vector<PenroseNode> nodes;
  double B = 0.0, tau_max = 0.0;
  double bound_constant = 0.0;  // |K^(xi)| <= bound_constant / |xi| for |xi| >= 2 Omega
  double omega_max = 0.0;
  double min_c = 0.0, min_s = 0.0;
  cplx argmin_c, argmin_s;
  double one_minus_kc0 = 0.0, one_minus_ks0 = 0.0;
  double axis_limit_c = 0.0, axis_limit_s = 0.0;  // extrapolated min over gamma as tau -> 0-
  bool outer_bound = false;
  int resonance_errors = 0;
  bool pass = false;
};

inline PenroseScan penrose_scan(const KernelOperators& op, const PenroseConfig& cfg) {
  PenroseScan sc;
  const HatKernel hc{&op.qc, 1.0, {}}, hs{&op.qs, -1.0, {}};
  // c = sum_l int |A_l| l w dw over both kernels
  double c = 0.0;
  for (const auto* s : {&op.qc, &op.qs}) {
    double cc = 0.0;
    for (const auto& b : s->blocks) {
      std::array<double, 5> y{};
      for (int i = 0; i < 5; ++i) {
        const double w = b.center + b.half * osc::ref_nodes[i];
        y[i] = std::abs(osc::horner(b.coef, cplx(osc::ref_nodes[i]))) * b.l * w;
      }
      cc += osc::plain_panel(osc::monomial_coeffs(y.data()), b.half);
    }
    c = std::max(c, 2.0 * cc);
  }
  sc.omega_max = std::max(op.qc.max_frequency(), op.qs.max_frequency());
  // for |xi| >= 2 Omega: |K^| <= 2c/|xi| <= 1/2 once |xi| >= 4c
  sc.bound_constant = 2.0 * c;
  sc.B = cfg.B > 0.0 ? cfg.B : std::max(2.0 * sc.omega_max, 4.0 * c);
  sc.tau_max = cfg.tau_max > 0.0 ? cfg.tau_max : sc.B;
  sc.outer_bound = sc.B >= 2.0 * sc.omega_max && sc.bound_constant / sc.B <= 0.5;

  sc.one_minus_kc0 = std::real(1.0 - hc(0.0));
  sc.one_minus_ks0 = std::real(1.0 - hs(0.0));
  sc.min_c = sc.min_s = std::numeric_limits<double>::infinity();

  std::vector<double> taus(cfg.n_tau);
  for (int k = 0; k < cfg.n_tau; ++k) {
    const double f = cfg.n_tau == 1 ? 0.0 : double(k) / (cfg.n_tau - 1);
    taus[k] = -cfg.tau_min * std::pow(sc.tau_max / cfg.tau_min, f);
  }
  for (int i = 0; i < cfg.n_gamma; ++i) {
    const double g = cfg.n_gamma == 1 ? 0.0 : -sc.B + 2.0 * sc.B * i / (cfg.n_gamma - 1);
    for (double tau : taus) {
      const cplx xi(g, tau);
      try {
        const double ac = std::abs(1.0 - hc(xi)), as = std::abs(1.0 - hs(xi));
        sc.nodes.push_back({g, tau, ac, as});
        if (ac < sc.min_c) {
          sc.min_c = ac;
          sc.argmin_c = xi;
        }
        if (as < sc.min_s) {
          sc.min_s = as;
          sc.argmin_s = xi;
        }
      } catch (const ResonanceError&) {
        ++sc.resonance_errors;
      }
    }
  }
  // tau -> 0- by linear extrapolation from tau_min and 2 tau_min
  sc.axis_limit_c = sc.axis_limit_s = std::numeric_limits<double>::infinity();
  for (int i = 0; i < cfg.n_gamma; ++i) {
    const double g = cfg.n_gamma == 1 ? 0.0 : -sc.B + 2.0 * sc.B * i / (cfg.n_gamma - 1);
    const cplx x1(g, -cfg.tau_min), x2(g, -2.0 * cfg.tau_min);
    const double c0 = 2.0 * std::abs(1.0 - hc(x1)) - std::abs(1.0 - hc(x2));
    const double s0 = 2.0 * std::abs(1.0 - hs(x1)) - std::abs(1.0 - hs(x2));
    sc.axis_limit_c = std::min(sc.axis_limit_c, c0);
    sc.axis_limit_s = std::min(sc.axis_limit_s, s0);
  }
  sc.pass = sc.min_c > 0.0 && sc.min_s > 0.0 && sc.outer_bound && sc.one_minus_kc0 > 0.0 && sc.one_minus_ks0 > 0.0;
  return sc;
}

// K^_C(xi) against composite Simpson of int_0^t_end K_C(t) e^{-i t xi} dt,
// t_end chosen so that e^{t_end Im xi} < 1e-15.
struct HatTimeCheck {
  cplx xi, spectral, quadrature;
  double dt = 0.0, t_end = 0.0;
  double gap = 0.0;
};

inline HatTimeCheck hat_time_domain_check(const SpectralTable& T, const KernelOperators& op, cplx xi, double dt = 0.05) {
  if (!(xi.imag() < 0.0)) throw DomainError("time-domain transform check needs Im xi < 0");
  HatTimeCheck r;
  r.xi = xi;
  r.dt = dt;
  std::size_t n = static_cast<std::size_t>(std::ceil(35.0 / -xi.imag() / dt));
  n += n % 2;
  r.t_end = n * dt;
  const auto ks = kernel_series(T, TimeGrid(dt, r.t_end));
  cplx s = 0.0;
  for (std::size_t i = 0; i < ks.t.size(); ++i) {
    const double w = (i == 0 || i + 1 == ks.t.size()) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    s += w * ks.K_C[i] * std::exp(cplx(0.0, -1.0) * ks.t[i] * xi);
  }
  r.quadrature = s * (dt / 3.0);
  r.spectral = hat_kernel_C(op, xi);
  r.gap = std::abs(r.spectral - r.quadrature);
  return r;
}

// Largest Im K^_C over gamma + i tau with gamma > 0, tau < 0.
struct QuadrantCheck {
  std::vector<cplx> nodes;
  double max_imag = -std::numeric_limits<double>::infinity();
  bool pass = false;
};

inline QuadrantCheck fourth_quadrant_check(const KernelOperators& op) {
  QuadrantCheck q;
  for (double g : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 20.0})
    for (double tau : {-1e-3, -1e-2, -0.1, -0.5, -2.0}) {
      q.nodes.emplace_back(g, tau);
      q.max_imag = std::max(q.max_imag, hat_kernel_C(op, cplx(g, tau)).imag());
    }
  q.pass = q.max_imag < 0.0;
  return q;
}

}  // namespace hmf
