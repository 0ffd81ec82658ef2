#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "hmf/elliptic.hpp"
#include "hmf/errors.hpp"

namespace hmf {

using cplx = std::complex<double>;
using elliptic::pi;

enum class Chart { OuterUpper, OuterLower, Eye };

inline const char* chart_name(Chart c) {
  switch (c) {
    case Chart::OuterUpper: return "outer_upper";
    case Chart::OuterLower: return "outer_lower";
    default: return "eye";
  }
}

inline int chart_sign(Chart c) { return c == Chart::OuterLower ? -1 : 1; }
inline bool is_outer(Chart c) { return c != Chart::Eye; }

struct PhasePoint {
  double x = 0.0;
  double v = 0.0;
};

inline double energy(const PhasePoint& p, double M0) { return 0.5 * p.v * p.v - M0 * std::cos(p.x); }

// h0 - M0 without the cancellation of the direct difference.
inline double separatrix_offset(const PhasePoint& p, double M0) {
  const double c = std::cos(0.5 * p.x);
  return 0.5 * p.v * p.v - 2.0 * M0 * c * c;
}

// One energy level of one chart, with everything derived from its modulus.
// Eye: modulus k, k^2 = (h+M0)/(2M0).  Outer: modulus kappa = 1/k(h),
// kappa^2 = 2M0/(h+M0).  `offset` is |h - M0| kept at full precision.
struct Level {
  Chart chart = Chart::Eye;
  double M0 = 1.0;
  double h = 0.0;
  double offset = 0.0;
  elliptic::Modulus md;
  elliptic::Periods per;
  double E = 0.0;
  double emk = 0.0;  // (E - k'^2 K)/k^2
  double omega = 0.0;
  double domega_dh = 0.0;
  double action = 0.0;

  double da_domega() const { return 1.0 / (omega * std::abs(domega_dh)); }
  int sign() const { return chart_sign(chart); }
};

namespace detail {

inline Level finish_eye(double M0, double m, double mc) {
  Level L;
  L.chart = Chart::Eye;
  L.M0 = M0;
  L.md = elliptic::Modulus::from_parameters(m, mc);
  L.h = M0 * (m - mc);
  L.offset = 2.0 * M0 * mc;
  L.per = elliptic::periods(L.md);
  L.E = elliptic::complete_e(L.md);
  L.emk = elliptic::e_minus_mc_k_over_m(L.md);
  const double sq = std::sqrt(M0), K = L.per.K;
  L.omega = pi * sq / (2.0 * K);
  L.domega_dh = -pi * L.emk / (8.0 * sq * K * K * mc);
  L.action = 8.0 * sq / pi * m * L.emk;
  return L;
}

inline Level finish_outer(double M0, double m, double mc, Chart c) {
  Level L;
  L.chart = c;
  L.M0 = M0;
  L.md = elliptic::Modulus::from_parameters(m, mc);
  L.h = 2.0 * M0 / m - M0;
  L.offset = 2.0 * M0 * mc / m;
  L.per = elliptic::periods(L.md);
  L.E = elliptic::complete_e(L.md);
  L.emk = elliptic::e_minus_mc_k_over_m(L.md);
  const double sq = std::sqrt(M0), K = L.per.K, kap = L.md.k;
  L.omega = pi * sq / (kap * K);
  L.domega_dh = pi * kap * L.E / (4.0 * sq * mc * K * K);
  L.action = 4.0 * sq * L.E / (pi * kap);
  return L;
}

inline void check_m0(double M0) {
  if (!(M0 > 0.0) || !std::isfinite(M0)) throw DomainError("magnetization M0 must be positive");
}

}  // namespace detail

// Eye level from energy h in (-M0, M0).
inline Level eye_level(double M0, double h) {
  detail::check_m0(M0);
  if (!(h >= -M0 && h < M0)) throw DomainError("eye level requires -M0 <= h < M0");
  return detail::finish_eye(M0, (h + M0) / (2.0 * M0), (M0 - h) / (2.0 * M0));
}

// Eye level at distance delta = M0 - h below the separatrix.
inline Level eye_level_below_separatrix(double M0, double delta) {
  detail::check_m0(M0);
  if (!(delta > 0.0 && delta <= 2.0 * M0)) throw DomainError("eye offset must lie in (0, 2 M0]");
  return detail::finish_eye(M0, (2.0 * M0 - delta) / (2.0 * M0), delta / (2.0 * M0));
}

inline Level outer_level(double M0, double h, Chart c = Chart::OuterUpper) {
  detail::check_m0(M0);
  if (!(h > M0)) throw DomainError("outer level requires h > M0");
  if (!is_outer(c)) throw DomainError("outer level needs an outer chart tag");
  return detail::finish_outer(M0, 2.0 * M0 / (h + M0), (h - M0) / (h + M0), c);
}

// Outer level at distance delta = h - M0 above the separatrix.
inline Level outer_level_above_separatrix(double M0, double delta, Chart c = Chart::OuterUpper) {
  detail::check_m0(M0);
  if (!(delta > 0.0)) throw DomainError("outer offset must be positive");
  if (!is_outer(c)) throw DomainError("outer level needs an outer chart tag");
  return detail::finish_outer(M0, 2.0 * M0 / (2.0 * M0 + delta), delta / (2.0 * M0 + delta), c);
}

inline Level level(Chart c, double M0, double h) {
  return c == Chart::Eye ? eye_level(M0, h) : outer_level(M0, h, c);
}

inline Level with_chart(Level L, Chart c) {
  if (is_outer(L.chart) != is_outer(c)) throw MisuseError("chart change across the separatrix");
  L.chart = c;
  return L;
}

// Level with prescribed frequency; Newton in s with m = 1/(1+e^{-s}).
inline Level level_from_frequency(Chart c, double M0, double omega) {
  detail::check_m0(M0);
  const double sq = std::sqrt(M0);
  if (!(omega > 0.0)) throw DomainError("frequency must be positive");
  if (c == Chart::Eye && !(omega < sq)) throw DomainError("eye frequencies lie in (0, sqrt(M0))");
  const bool eye = c == Chart::Eye;
  // eye: K = pi sqrt(M0) / (2 omega); outer: kappa K = pi sqrt(M0) / omega
  const double target = eye ? pi * sq / (2.0 * omega) : pi * sq / omega;
  if (eye && target <= 0.5 * pi) return detail::finish_eye(M0, 0.0, 1.0);

  auto parts = [](double s, double& m, double& mc) {
    if (s >= 0) {
      const double e = std::exp(-s);
      m = 1.0 / (1.0 + e);
      mc = e / (1.0 + e);
    } else {
      const double e = std::exp(s);
      m = e / (1.0 + e);
      mc = 1.0 / (1.0 + e);
    }
  };
  double s;
  if (target > 2.0) {
    const double mc0 = 16.0 * std::exp(-2.0 * target);
    s = std::log((1.0 - mc0) / mc0);
  } else if (eye) {
    const double m0 = std::clamp(4.0 * (2.0 * target / pi - 1.0), 1e-300, 0.9);
    s = std::log(m0 / (1.0 - m0));
  } else {
    const double m0 = std::clamp(std::pow(2.0 * target / pi, 2), 1e-300, 0.9);
    s = std::log(m0 / (1.0 - m0));
  }
  double lo = -750.0, hi = 740.0;
  const double lt = std::log(target);
  for (int it = 0; it < 200; ++it) {
    double m, mc;
    parts(s, m, mc);
    const auto md = elliptic::Modulus::from_parameters(m, mc);
    const double K = elliptic::complete_k(md), E = elliptic::complete_e(md);
    double val, der;
    if (eye) {
      val = std::log(K) - lt;
      der = m * elliptic::e_minus_mc_k_over_m(md) / (2.0 * K);
    } else {
      val = std::log(md.k * K) - lt;
      der = E / (2.0 * K);
    }
    if (val > 0.0) hi = s; else lo = s;
    const double step = val / der;
    if (std::abs(val) < 1e-15 || std::abs(step) < 1e-14 * std::max(1.0, std::abs(s)))
      return eye ? detail::finish_eye(M0, m, mc) : detail::finish_outer(M0, m, mc, c);
    double next = s - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    s = next;
  }
  std::ostringstream os;
  os << "level_from_frequency: no convergence for omega=" << omega;
  throw NumericError(os.str());
}

// Level with prescribed action, Newton with da/dh = 1/omega.
inline Level level_from_action(Chart c, double M0, double a) {
  detail::check_m0(M0);
  const double sq = std::sqrt(M0);
  const double a_sep_eye = 8.0 * sq / pi, a_sep_out = 4.0 * sq / pi;
  if (c == Chart::Eye && !(a > 0.0 && a < a_sep_eye)) throw DomainError("eye action outside (0, 8 sqrt(M0)/pi)");
  if (is_outer(c) && !(a > a_sep_out)) throw DomainError("outer action must exceed 4 sqrt(M0)/pi");
  // Newton on h; near-separatrix start handled by bisection fallback
  double lo, hi, h;
  if (c == Chart::Eye) {
    lo = -M0;
    hi = M0;
    h = -M0 + sq * a;
  } else {
    lo = M0;
    hi = M0 + std::max(2.0 * M0, a * a);
    h = std::max(M0 + 0.5 * M0, std::pow(pi * a / 4.0, 2) / 2.0);
  }
  for (int it = 0; it < 300; ++it) {
    if (!(h > lo && h < hi)) h = 0.5 * (lo + hi);
    const Level L = level(c, M0, h);
    const double r = L.action - a;
    if (r > 0.0) hi = h; else lo = h;
    const double next = h - r * L.omega;
    if (std::abs(r) <= 1e-15 * std::max(1.0, a) || hi - lo < 1e-15 * std::max(1.0, std::abs(h))) return L;
    h = next;
  }
  throw NumericError("level_from_action: no convergence");
}

inline double frequency(Chart c, double h, double M0) { return level(c, M0, h).omega; }
inline double action(Chart c, double h, double M0) { return level(c, M0, h).action; }

struct ChartCoordinates {
  Chart chart = Chart::Eye;
  double h = 0.0;
  double theta = 0.0;
};

struct Classified {
  Chart chart;
  double h;
};

inline Classified classify(const PhasePoint& p, double M0, double eps_sep = 1e-6) {
  detail::check_m0(M0);
  const double d = separatrix_offset(p, M0);
  if (std::abs(d) <= eps_sep * M0) {
    std::ostringstream os;
    os << "point within " << std::abs(d) << " of the separatrix";
    throw SeparatrixError(os.str(), std::abs(d));
  }
  const double h = energy(p, M0);
  if (d < 0.0) return {Chart::Eye, h};
  return {p.v > 0.0 ? Chart::OuterUpper : Chart::OuterLower, h};
}

// Wrap into [-pi, pi).
inline double wrap_angle(double a) {
  double r = std::remainder(a, 2.0 * pi);
  if (r >= pi) r -= 2.0 * pi;
  return r;
}

namespace detail {

// 2 arcsin(y) for |y| <= 1 given 1 - |y| accurately.
inline double twice_arcsin(double y, double one_minus_abs) {
  if (std::abs(y) < 0.5) return 2.0 * std::asin(y);
  const double r = pi - 4.0 * std::asin(std::sqrt(0.5 * std::max(one_minus_abs, 0.0)));
  return y < 0.0 ? -r : r;
}

}  // namespace detail

struct CartesianEval {
  double x, v, sin_x, cos_x;
};

inline CartesianEval cartesian(const Level& L, double theta) {
  const double sq = std::sqrt(L.M0);
  const auto& md = L.md;
  if (L.chart == Chart::Eye) {
    if (md.m == 0.0) return {0.0, 0.0, 0.0, 1.0};
    const double u = 2.0 * L.per.K / pi * (theta + 0.5 * pi);
    const auto ev = elliptic::jacobi_sn_cn_dn(u, md, L.per);
    const double ys = md.k * ev.sn;
    const double oma = md.mc / (1.0 + md.k) + md.k * ev.cn * ev.cn / (1.0 + std::abs(ev.sn));
    CartesianEval c;
    c.x = detail::twice_arcsin(ys, oma);
    c.v = 2.0 * md.k * sq * ev.cn;
    c.sin_x = 2.0 * ys * ev.dn;
    c.cos_x = 1.0 - 2.0 * ys * ys;
    return c;
  }
  const double eps = L.sign();
  const double u = L.per.K * theta / pi;
  const auto ev = elliptic::jacobi_sn_cn_dn(u, md, L.per);
  CartesianEval c;
  c.x = eps * 2.0 * ev.am;
  c.v = eps * 2.0 * sq / md.k * ev.dn;
  c.sin_x = eps * 2.0 * ev.sn * ev.cn;
  c.cos_x = ev.cn * ev.cn - ev.sn * ev.sn;
  return c;
}

inline PhasePoint to_cartesian(const Level& L, double theta) {
  const auto c = cartesian(L, theta);
  return {c.x, c.v};
}

inline PhasePoint to_cartesian(const ChartCoordinates& cc, double M0) {
  if (!(cc.theta >= -pi && cc.theta <= pi)) throw DomainError("angle outside [-pi, pi]");
  return to_cartesian(level(cc.chart, M0, cc.h), cc.theta);
}

// Angle of a phase point on its level (inverse of to_cartesian).
inline double angle_of(const Level& L, const PhasePoint& p) {
  const auto& md = L.md;
  if (L.chart == Chart::Eye) {
    if (md.m == 0.0) return 0.0;
    const double sn = std::sin(0.5 * p.x) / md.k;
    const double cn = p.v / (2.0 * md.k * std::sqrt(L.M0));
    const double am = std::atan2(sn, cn);
    const double u = elliptic::incomplete_f(am, md);
    return wrap_angle(pi * u / (2.0 * L.per.K) - 0.5 * pi);
  }
  const double am = L.sign() * wrap_angle(p.x) / 2.0;
  return wrap_angle(pi * elliptic::incomplete_f(am, md) / L.per.K);
}

inline ChartCoordinates from_cartesian(const PhasePoint& p, double M0, double eps_sep = 1e-6) {
  const auto cl = classify(p, M0, eps_sep);
  const Level L = level(cl.chart, M0, cl.h);
  return {cl.chart, cl.h, angle_of(L, p)};
}

// Closed-form angle-Fourier coefficients of cos x and sin x.  On the eye both
// are real and even in l; on the outer charts C_l is real and
// S_l = -i eps r_l with r_l returned by sin_coefficient_real.
inline double cos_coefficient(const Level& L, int ell) {
  const int l = std::abs(ell);
  const auto& md = L.md;
  const double K = L.per.K;
  if (L.chart == Chart::Eye) {
    if (l == 0) return md.m == 0.0 ? 1.0 : -1.0 + 2.0 * L.E / K;
    if (l % 2 || md.m == 0.0) return 0.0;
    const int n = l / 2;
    const double qn = std::exp(n * L.per.log_q);
    const double den = -std::expm1(2.0 * n * L.per.log_q);
    return 2.0 * pi * pi / (K * K) * (n % 2 ? -1.0 : 1.0) * n * qn / den;
  }
  if (l == 0) return 1.0 - 2.0 / md.m + 2.0 * L.E / (md.m * K);
  const double ql = std::exp(l * L.per.log_q);
  const double den = -std::expm1(2.0 * l * L.per.log_q);
  return 2.0 * pi * pi / (md.m * K * K) * l * ql / den;
}

inline double sin_coefficient_real(const Level& L, int ell) {
  const int l = std::abs(ell);
  const auto& md = L.md;
  const double K = L.per.K;
  if (l == 0) return 0.0;
  if (L.chart == Chart::Eye) {
    if (l % 2 == 0 || md.m == 0.0) return 0.0;
    const int n = (l + 1) / 2;
    const double qh = std::exp((n - 0.5) * L.per.log_q);
    const double den = 1.0 + std::exp(l * L.per.log_q);
    return pi * pi / (K * K) * (n % 2 ? 1.0 : -1.0) * l * qh / den;
  }
  const double ql = std::exp(l * L.per.log_q);
  const double den = 1.0 + std::exp(2.0 * l * L.per.log_q);
  const double r = 2.0 * pi * pi / (md.m * K * K) * l * ql / den;
  return ell > 0 ? r : -r;
}

inline cplx closed_cos_coefficient(const Level& L, int ell) { return cos_coefficient(L, ell); }

inline cplx closed_sin_coefficient(const Level& L, int ell) {
  const double r = sin_coefficient_real(L, ell);
  if (L.chart == Chart::Eye) return r;
  return cplx(0.0, -L.sign() * r);
}

using PhaseFunction = std::function<double(double x, double v)>;

// Observable on phase space.  `p` is the declared flatness order at the
// origin; `mu` the velocity decay exponent.
struct Observable {
  std::string name;
  PhaseFunction f;
  int p = 0;
  double mu = 1e9;
  double operator()(double x, double v) const { return f(x, v); }
};

// f_l for l = 0..L by an N-point periodic trapezoid rule in theta.
inline std::vector<cplx> angle_fourier(const Level& L, const PhaseFunction& f, int lmax, int n_theta) {
  if (n_theta < 2 * lmax + 2) throw MisuseError("angle_fourier: n_theta too small for lmax");
  std::vector<cplx> vals(n_theta), out;
  for (int j = 0; j < n_theta; ++j) {
    const double th = -pi + 2.0 * pi * j / n_theta;
    const auto c = cartesian(L, th);
    vals[j] = f(c.x, c.v);
  }
  static thread_local Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, vals);
  out.resize(lmax + 1);
  for (int l = 0; l <= lmax; ++l) out[l] = (l % 2 ? -1.0 : 1.0) * spec[l] / double(n_theta);
  return out;
}

// Single coefficient, doubling the angle resolution until converged.
inline cplx fourier_coefficient(const PhaseFunction& f, const Level& L, int ell, double tol = 1e-13,
                                int n_start = 64, int n_max = 1 << 16) {
  const int l = std::abs(ell);
  auto eval = [&](int n) {
    cplx s = 0.0;
    for (int j = 0; j < n; ++j) {
      const double th = -pi + 2.0 * pi * j / n;
      const auto c = cartesian(L, th);
      s += f(c.x, c.v) * std::polar(1.0, -ell * th);
    }
    return s / double(n);
  };
  int n = std::max(n_start, 4 * l + 8);
  cplx prev = eval(n);
  while (n < n_max) {
    n *= 2;
    const cplx cur = eval(n);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  std::ostringstream os;
  os << "fourier_coefficient: angle resolution exhausted at N=" << n << " (l=" << ell << ", h=" << L.h << ")";
  throw NumericError(os.str());
}

}  // namespace hmf
