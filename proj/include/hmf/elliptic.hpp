#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "hmf/errors.hpp"

namespace hmf::elliptic {

inline constexpr double pi = std::numbers::pi;

// Modulus k with its complement k' carried separately, so that quantities
// near the separatrix (k -> 1) keep full relative precision in k'.
struct Modulus {
  double k = 0.0;
  double kc = 1.0;
  double m = 0.0;   // k^2
  double mc = 1.0;  // k'^2

  static Modulus from_k(double k) {
    if (!(k >= 0.0 && k <= 1.0)) throw DomainError("modulus k must lie in [0,1]");
    Modulus md;
    md.k = k;
    md.m = k * k;
    md.mc = (1.0 - k) * (1.0 + k);
    md.kc = std::sqrt(md.mc);
    return md;
  }

  static Modulus from_complement(double kc) {
    Modulus md = from_k(kc);
    std::swap(md.k, md.kc);
    std::swap(md.m, md.mc);
    return md;
  }

  // m = k^2 and mc = 1 - k^2 given independently (mc may be far below eps).
  static Modulus from_parameters(double m, double mc) {
    if (!(m >= 0.0 && mc >= 0.0 && std::abs(m + mc - 1.0) < 1e-12))
      throw DomainError("parameters must satisfy m + mc = 1, m, mc >= 0");
    Modulus md;
    md.m = m;
    md.mc = mc;
    md.k = std::sqrt(m);
    md.kc = std::sqrt(mc);
    return md;
  }

  Modulus complement() const { return Modulus{kc, k, mc, m}; }
};

inline double agm(double a, double b) {
  for (int i = 0; i < 80; ++i) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    if (std::abs(a - b) <= 4.0 * std::numeric_limits<double>::epsilon() * a) break;
  }
  return 0.5 * (a + b);
}

// Below this k'^2 the logarithmic expansion at k = 1 is used (|1-k| < 1e-8).
inline constexpr double near_one_mc = 2e-8;

inline double complete_k(const Modulus& md) {
  if (md.kc == 0.0) throw DomainError("K(k) diverges at k = 1");
  if (md.mc < near_one_mc) {
    const double L = std::log(4.0 / md.kc);
    return L + 0.25 * md.mc * (L - 1.0);
  }
  return pi / (2.0 * agm(1.0, md.kc));
}

inline double complete_e(const Modulus& md) {
  if (md.kc == 0.0) return 1.0;
  if (md.mc < near_one_mc) {
    const double L = std::log(4.0 / md.kc);
    return 1.0 + 0.5 * md.mc * (L - 0.5);
  }
  double a = 1.0, b = md.kc;
  double weight = 0.5;
  double sum = 0.5 * md.m;
  for (int i = 0; i < 80; ++i) {
    const double c = 0.5 * (a - b);
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
    weight *= 2.0;
    sum += weight * c * c;
    if (std::abs(c) <= 4.0 * std::numeric_limits<double>::epsilon() * a) break;
  }
  return pi / (2.0 * a) * (1.0 - sum);
}

inline double complete_elliptic_k(double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("complete_elliptic_k requires 0 <= k < 1");
  return complete_k(Modulus::from_k(k));
}

inline double complete_elliptic_e(double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw DomainError("complete_elliptic_e requires 0 <= k <= 1");
  return complete_e(Modulus::from_k(k));
}

// (E - k'^2 K) / k^2, accurate as k -> 0 where the difference cancels.
inline double e_minus_mc_k_over_m(const Modulus& md) {
  if (md.m < 0.1) {
    // (pi/4) sum_n [(1/2)_n / n!]^2 m^n / (n+1)
    double c = 1.0, mn = 1.0, sum = 0.0;
    for (int n = 0; n < 200; ++n) {
      const double term = c * c * mn / (n + 1);
      sum += term;
      if (term < 1e-18 * sum) break;
      c *= (n + 0.5) / (n + 1.0);
      mn *= md.m;
    }
    return 0.25 * pi * sum;
  }
  return (complete_e(md) - md.mc * complete_k(md)) / md.m;
}

// Carlson symmetric integrals.
inline double carlson_rf(double x, double y, double z) {
  if (std::min({x, y, z}) < 0.0 || std::min({x + y, y + z, z + x}) == 0.0)
    throw DomainError("carlson_rf: invalid arguments");
  constexpr double errtol = 1e-3;
  double mu = 0, dx = 0, dy = 0, dz = 0;
  for (int i = 0; i < 200; ++i) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lam = sx * (sy + sz) + sy * sz;
    x = 0.25 * (x + lam);
    y = 0.25 * (y + lam);
    z = 0.25 * (z + lam);
    mu = (x + y + z) / 3.0;
    dx = (mu - x) / mu;
    dy = (mu - y) / mu;
    dz = (mu - z) / mu;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < errtol) break;
  }
  const double e2 = dx * dy - dz * dz;
  const double e3 = dx * dy * dz;
  return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / std::sqrt(mu);
}

inline double carlson_rd(double x, double y, double z) {
  if (std::min(x, y) < 0.0 || x + y == 0.0 || z <= 0.0)
    throw DomainError("carlson_rd: invalid arguments");
  constexpr double errtol = 5e-4;
  constexpr double c1 = 3.0 / 14.0, c2 = 1.0 / 6.0, c3 = 9.0 / 22.0, c4 = 3.0 / 26.0;
  constexpr double c5 = 0.25 * c3, c6 = 1.5 * c4;
  double sum = 0.0, fac = 1.0, ave = 0, dx = 0, dy = 0, dz = 0;
  for (int i = 0; i < 200; ++i) {
    const double sx = std::sqrt(x), sy = std::sqrt(y), sz = std::sqrt(z);
    const double lam = sx * (sy + sz) + sy * sz;
    sum += fac / (sz * (z + lam));
    fac *= 0.25;
    x = 0.25 * (x + lam);
    y = 0.25 * (y + lam);
    z = 0.25 * (z + lam);
    ave = 0.2 * (x + y + 3.0 * z);
    dx = (ave - x) / ave;
    dy = (ave - y) / ave;
    dz = (ave - z) / ave;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < errtol) break;
  }
  const double ea = dx * dy, eb = dz * dz, ec = ea - eb, ed = ea - 6.0 * eb, ee = ed + ec + ec;
  return 3.0 * sum + fac * (1.0 + ed * (-c1 + c5 * ed - c6 * dz * ee) +
                            dz * (c2 * ee + dz * (-c3 * ec + dz * c4 * ea))) /
                         (ave * std::sqrt(ave));
}

namespace detail {

inline void reduce_angle(double phi, double& r, double& n) {
  n = std::nearbyint(phi / pi);
  r = phi - n * pi;
}

}  // namespace detail

inline double incomplete_f(double phi, const Modulus& md) {
  double r, n;
  detail::reduce_angle(phi, r, n);
  if (md.kc == 0.0 && (n != 0.0 || std::abs(r) >= 0.5 * pi))
    throw DivergenceError("F(phi, 1) diverges at |phi| = pi/2");
  const double s = std::sin(r), c = std::cos(r);
  const double c2 = c * c;
  double val = s * carlson_rf(c2, c2 + md.mc * s * s, 1.0);
  if (n != 0.0) val += 2.0 * n * complete_k(md);
  return val;
}

inline double incomplete_e(double phi, const Modulus& md) {
  double r, n;
  detail::reduce_angle(phi, r, n);
  const double s = std::sin(r), c = std::cos(r);
  const double c2 = c * c, d2 = c2 + md.mc * s * s;
  double val = s * carlson_rf(c2, d2, 1.0);
  if (md.m != 0.0 && s != 0.0) val -= md.m / 3.0 * s * s * s * carlson_rd(c2, d2, 1.0);
  if (n != 0.0) val += 2.0 * n * complete_e(md);
  return val;
}

inline double incomplete_f(double phi, double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw DomainError("incomplete_f requires 0 <= k <= 1");
  return incomplete_f(phi, Modulus::from_k(k));
}

inline double incomplete_e(double phi, double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw DomainError("incomplete_e requires 0 <= k <= 1");
  return incomplete_e(phi, Modulus::from_k(k));
}

// K, K' and the nome q = exp(-pi K'/K).
struct Periods {
  double K = 0.5 * pi;
  double Kp = std::numeric_limits<double>::infinity();
  double log_q = -std::numeric_limits<double>::infinity();
  double q = 0.0;
};

inline Periods periods(const Modulus& md) {
  Periods p;
  p.K = complete_k(md);
  if (md.k == 0.0) return p;
  p.Kp = complete_k(md.complement());
  p.log_q = -pi * p.Kp / p.K;
  p.q = std::exp(p.log_q);
  return p;
}

inline double nome(const Modulus& md) {
  if (!(md.k > 0.0 && md.kc > 0.0)) throw DomainError("nome requires 0 < k < 1");
  return periods(md).q;
}

inline double nome(double k) {
  if (!(k > 0.0 && k < 1.0)) throw DomainError("nome requires 0 < k < 1");
  return nome(Modulus::from_k(k));
}

// Smallest M with q^(M+1)/(1-q) < tol.
inline int series_terms(double q, double tol = 1e-17) {
  if (q <= 0.0) return 1;
  const double lq = std::log(q);
  const double need = (std::log(tol) + std::log1p(-q)) / lq - 1.0;
  return std::clamp(static_cast<int>(std::ceil(need)), 1, 100000);
}

// Fourier series of am, sn, cn, dn and of the products sn^2, sn cn, sn dn.
struct FourierSeries {
  Modulus md;
  Periods per;
  double E;
  int terms;

  FourierSeries(const Modulus& mod, int nterms = -1)
      : md(mod), per(periods(mod)), E(complete_e(mod)) {
    if (!(md.k > 0.0 && md.kc > 0.0)) throw DomainError("Fourier series require 0 < k < 1");
    terms = nterms > 0 ? nterms : series_terms(per.q, 1e-20);
  }

  double qpow(double e) const { return std::exp(e * per.log_q); }

  double am(double u) const {
    const double w = pi * u / per.K;
    double s = 0.5 * w;
    for (int n = 1; n <= terms; ++n) {
      const double qn = qpow(n);
      s += 2.0 * qn / (n * (1.0 + qn * qn)) * std::sin(n * w);
    }
    return s;
  }

  double sn(double u) const {
    const double w = 0.5 * pi * u / per.K;
    double s = 0.0;
    for (int n = 1; n <= terms; ++n) {
      const double e = 2.0 * n - 1.0;
      s += qpow(n - 0.5) / -std::expm1(e * per.log_q) * std::sin(e * w);
    }
    return 2.0 * pi / (md.k * per.K) * s;
  }

  double cn(double u) const {
    const double w = 0.5 * pi * u / per.K;
    double s = 0.0;
    for (int n = 1; n <= terms; ++n) {
      const double e = 2.0 * n - 1.0;
      s += qpow(n - 0.5) / (1.0 + qpow(e)) * std::cos(e * w);
    }
    return 2.0 * pi / (md.k * per.K) * s;
  }

  double dn(double u) const {
    const double w = pi * u / per.K;
    double s = 0.0;
    for (int n = 1; n <= terms; ++n) {
      const double qn = qpow(n);
      s += qn / (1.0 + qn * qn) * std::cos(n * w);
    }
    return 0.5 * pi / per.K + 2.0 * pi / per.K * s;
  }

  double sn2(double u) const {
    const double w = pi * u / per.K;
    double s = 0.0;
    for (int n = 1; n <= terms; ++n)
      s += n * qpow(n) / -std::expm1(2.0 * n * per.log_q) * std::cos(n * w);
    return (per.K - E) / (md.m * per.K) - 2.0 * pi * pi / (md.m * per.K * per.K) * s;
  }

  double sncn(double u) const {
    const double w = pi * u / per.K;
    double s = 0.0;
    for (int n = 1; n <= terms; ++n) {
      const double qn = qpow(n);
      s += n * qn / (1.0 + qn * qn) * std::sin(n * w);
    }
    return 2.0 * pi * pi / (md.m * per.K * per.K) * s;
  }

  double sndn(double u) const {
    const double w = 0.5 * pi * u / per.K;
    double s = 0.0;
    for (int n = 1; n <= terms; ++n) {
      const double e = 2.0 * n - 1.0;
      s += e * qpow(n - 0.5) / (1.0 + qpow(e)) * std::sin(e * w);
    }
    return pi * pi / (md.k * per.K * per.K) * s;
  }
};

struct EllipticEval {
  double u = 0.0;
  double am = 0.0;
  double sn = 0.0;
  double cn = 1.0;
  double dn = 1.0;
};

namespace detail {

// Solve F(phi) = r for phi in [-pi/2, pi/2] with |r| <= K.
inline double invert_f(double r, const Modulus& md, const Periods& per) {
  if (r >= per.K) return 0.5 * pi;
  if (r <= -per.K) return -0.5 * pi;
  if (md.m == 0.0) return r;

  // 12-term Fourier seed
  const double w = pi * r / per.K;
  double phi = 0.5 * w;
  for (int n = 1; n <= 12; ++n) {
    const double qn = std::exp(n * per.log_q);
    phi += 2.0 * qn / (n * (1.0 + qn * qn)) * std::sin(n * w);
  }
  double lo = -0.5 * pi, hi = 0.5 * pi;
  phi = std::clamp(phi, lo, hi);

  for (int it = 0; it < 200; ++it) {
    const double s = std::sin(phi), c = std::cos(phi);
    const double res = incomplete_f(phi, md) - r;
    if (res > 0.0)
      hi = phi;
    else if (res < 0.0)
      lo = phi;
    else
      return phi;
    const double delta = std::sqrt(c * c + md.mc * s * s);
    double next = phi - res * delta;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - phi);
    phi = next;
    if (step <= 2.0 * std::numeric_limits<double>::epsilon() || hi - lo <= 4e-16) return phi;
  }
  std::ostringstream os;
  os.precision(17);
  os << "jacobi_am: inversion did not converge (r=" << r << ", k=" << md.k << ", k'=" << md.kc
     << ", bracket=[" << lo << "," << hi << "])";
  throw NumericError(os.str());
}

}  // namespace detail

inline double jacobi_am(double u, const Modulus& md, const Periods& per) {
  if (md.kc == 0.0) return std::atan(std::sinh(u));
  const double n = std::nearbyint(u / (2.0 * per.K));
  const double r = u - 2.0 * n * per.K;
  return n * pi + detail::invert_f(r, md, per);
}

inline double jacobi_am(double u, const Modulus& md) { return jacobi_am(u, md, periods(md)); }

inline double jacobi_am(double u, double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("jacobi_am requires 0 <= k < 1");
  return jacobi_am(u, Modulus::from_k(k));
}

inline EllipticEval jacobi_sn_cn_dn(double u, const Modulus& md, const Periods& per) {
  EllipticEval ev;
  ev.u = u;
  ev.am = jacobi_am(u, md, per);
  ev.sn = std::sin(ev.am);
  ev.cn = std::cos(ev.am);
  ev.dn = std::sqrt(ev.cn * ev.cn + md.mc * ev.sn * ev.sn);
  return ev;
}

inline EllipticEval jacobi_sn_cn_dn(double u, const Modulus& md) {
  return jacobi_sn_cn_dn(u, md, periods(md));
}

inline EllipticEval jacobi_sn_cn_dn(double u, double k) {
  if (!(k >= 0.0 && k < 1.0)) throw DomainError("jacobi_sn_cn_dn requires 0 <= k < 1");
  return jacobi_sn_cn_dn(u, Modulus::from_k(k));
}

}  // namespace hmf::elliptic
