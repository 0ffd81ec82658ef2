#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/tools/roots.hpp>

#include "hmf/bessel.hpp"
#include "hmf/elliptic.hpp"
#include "hmf/errors.hpp"

namespace hmf {

// Stationary profile eta = G(h0).
struct Profile {
  std::string kind;  // "gaussian" or the name of a custom profile
  double alpha = 0.0, beta = 1.0, y0 = 0.0;
  double mu = std::numeric_limits<double>::infinity();
  std::function<double(double)> G, dG;

  bool is_gaussian() const { return kind == "gaussian"; }

  static Profile gaussian(double alpha, double beta) {
    if (!(alpha >= 0.0 && beta > 0.0)) throw DomainError("gaussian profile needs alpha >= 0, beta > 0");
    Profile p;
    p.kind = "gaussian";
    p.alpha = alpha;
    p.beta = beta;
    p.G = [alpha, beta](double y) { return alpha * std::exp(-beta * y); };
    p.dG = [alpha, beta](double y) { return -alpha * beta * std::exp(-beta * y); };
    return p;
  }

  // G(y) = alpha / (1 + exp(beta (y - y0)))
  static Profile fermi(double alpha, double beta, double y0) {
    if (!(alpha >= 0.0 && beta > 0.0)) throw DomainError("fermi profile needs alpha >= 0, beta > 0");
    Profile p;
    p.kind = "fermi";
    p.alpha = alpha;
    p.beta = beta;
    p.y0 = y0;
    p.G = [=](double y) {
      const double s = beta * (y - y0);
      return s > 0 ? alpha * std::exp(-s) / (1.0 + std::exp(-s)) : alpha / (1.0 + std::exp(s));
    };
    p.dG = [=](double y) {
      const double s = beta * (y - y0);
      const double e = std::exp(-std::abs(s));
      return -alpha * beta * e / ((1.0 + e) * (1.0 + e));
    };
    return p;
  }

  static Profile named(const std::string& name, double alpha, double beta, double y0) {
    if (name == "gaussian") return gaussian(alpha, beta);
    if (name == "fermi") return fermi(alpha, beta, y0);
    throw ConfigError("unknown profile '" + name + "' (known: gaussian, fermi)");
  }
};

// (1/2pi) int_{-pi}^{pi} int_R f(x, v) dv dx, periodic trapezoid in x,
// double-exponential rule in v.
inline double phase_integral(const std::function<double(double, double)>& f, double tol = 1e-14) {
  // x-average and mean |f|, the latter setting the convergence scale
  auto inner_x = [&](double v, int n) {
    double s = 0.0, a = 0.0;
    for (int j = 0; j < n; ++j) {
      const double y = f(-elliptic::pi + 2.0 * elliptic::pi * j / n, v);
      s += y;
      a += std::abs(y);
    }
    return std::pair{s / n, a / n};
  };
  auto xavg = [&](double v) {
    int n = 64;
    double prev = inner_x(v, n).first;
    while (n < 8192) {
      n *= 2;
      const auto [cur, scale] = inner_x(v, n);
      if (std::abs(cur - prev) <= 1e-15 * scale) return cur;
      prev = cur;
    }
    return prev;
  };
  boost::math::quadrature::exp_sinh<double> rule;
  const double up = rule.integrate([&](double v) { return xavg(v); }, 0.0, std::numeric_limits<double>::infinity(), tol);
  const double dn = rule.integrate([&](double v) { return xavg(-v); }, 0.0, std::numeric_limits<double>::infinity(), tol);
  return up + dn;
}

inline double gaussian_map_closed(const Profile& G, double z) {
  return G.alpha * std::sqrt(2.0 * elliptic::pi / G.beta) * elliptic::bessel_i(1, G.beta * z);
}

// C[G(v^2/2 - z cos x)] by direct quadrature.
inline double magnetization_map(const Profile& G, double z) {
  if (!(z >= 0.0)) throw DomainError("magnetization_map requires z >= 0");
  if (z == 0.0) return 0.0;
  return phase_integral([&](double x, double v) { return G.G(0.5 * v * v - z * std::cos(x)) * std::cos(x); });
}

struct ExistenceReport {
  double zeta = 0.0;
  double first_value = 0.0;   // C[G(v^2/2 - zeta cos x)] - zeta
  double second_value = 0.0;  // 1 + int G'(v^2/2) cos^2 x
  bool first = false;
  bool second = false;
};

inline ExistenceReport existence_conditions(const Profile& G, double zeta) {
  ExistenceReport r;
  r.zeta = zeta;
  r.first_value = magnetization_map(G, zeta) - zeta;
  if (G.is_gaussian())
    r.second_value = 1.0 - G.alpha * std::sqrt(G.beta) * std::sqrt(2.0 * elliptic::pi) / 2.0;
  else
    r.second_value = 1.0 + phase_integral([&](double x, double v) {
                       const double c = std::cos(x);
                       return G.dG(0.5 * v * v) * c * c;
                     });
  r.first = r.first_value >= 0.0;
  r.second = r.second_value > 0.0;
  return r;
}

inline double default_zeta(const Profile& G) {
  if (G.is_gaussian()) {
    const double s = G.alpha * std::sqrt(G.beta);
    return 5.0 / G.beta * std::max(1.0, s > 0 ? std::log(1.0 / s) : 1.0);
  }
  return 5.0;
}

struct NoPositiveRoot : NumericError {
  NoPositiveRoot(const std::string& what, ExistenceReport r) : NumericError(what), report(r) {}
  ExistenceReport report;
};

struct StationaryState {
  Profile profile;
  double M0 = 0.0;
  double residual = 0.0;
  ExistenceReport conditions;

  double G(double h) const { return profile.G(h); }
  double dG(double h) const { return profile.dG(h); }
};

// Smallest positive root of C[G(v^2/2 - z cos x)] = z in (0, zeta].
inline StationaryState solve_magnetization(const Profile& G, double zeta = 0.0, int scan = 64) {
  auto map = [&](double z) { return G.is_gaussian() ? gaussian_map_closed(G, z) : magnetization_map(G, z); };
  const bool auto_zeta = !(zeta > 0.0);
  if (auto_zeta) {
    zeta = default_zeta(G);
    // quadrature profiles grow like sqrt(z) at best: scan the default bracket only
    if (G.is_gaussian())
      for (int i = 0; i < 30 && map(zeta) < zeta; ++i) zeta *= 2.0;
  }
  ExistenceReport rep = existence_conditions(G, zeta);
  auto F = [&](double z) { return map(z) - z; };

  double a = 0.0, fa = 0.0;
  bool found = false;
  double lo = 0, hi = 0;
  for (int j = 1; j <= scan; ++j) {
    const double z = zeta * j / scan;
    const double fz = F(z);
    if (fz == 0.0) {
      lo = hi = z;
      found = true;
      break;
    }
    if (j > 1 && (fa < 0.0) != (fz < 0.0)) {
      lo = a;
      hi = z;
      found = true;
      break;
    }
    a = z;
    fa = fz;
  }
  if (!found) {
    std::ostringstream os;
    os << "no positive root of the magnetization equation in (0," << zeta << "]; first=" << rep.first
       << " (" << rep.first_value << "), second=" << rep.second << " (" << rep.second_value << ")";
    throw NoPositiveRoot(os.str(), rep);
  }
  double M0 = lo;
  if (hi > lo) {
    boost::uintmax_t iters = 200;
    auto r = boost::math::tools::toms748_solve(F, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
    M0 = 0.5 * (r.first + r.second);
  }
  StationaryState s;
  s.profile = G;
  s.M0 = M0;
  s.residual = map(M0) - M0;
  s.conditions = rep;
  return s;
}

// 1 + int G' cos^2 - (int G' cos)^2 / int G'
inline double stability_sufficient(const StationaryState& st) {
  const double M0 = st.M0;
  auto h0 = [M0](double x, double v) { return 0.5 * v * v - M0 * std::cos(x); };
  const double a = phase_integral([&](double x, double v) {
    const double c = std::cos(x);
    return st.dG(h0(x, v)) * c * c;
  });
  const double b = phase_integral([&](double x, double v) { return st.dG(h0(x, v)) * std::cos(x); });
  const double c = phase_integral([&](double x, double v) { return st.dG(h0(x, v)); });
  return 1.0 + a - b * b / c;
}

// Gaussian closed form 1 - b M0 I1'/I1 + b M0 I1/I0 with argument b M0.
inline double gaussian_sufficient_closed(const StationaryState& st) {
  if (!st.profile.is_gaussian()) throw MisuseError("closed form only for gaussian profiles");
  const double z = st.profile.beta * st.M0;
  const double i0 = elliptic::bessel_i(0, z), i1 = elliptic::bessel_i(1, z);
  const double d1 = elliptic::bessel_i_derivative(1, z);
  return 1.0 - z * d1 / i1 + z * i1 / i0;
}

// 1 + int G'(h0) cos^2 x, the part of the stability indicator without C_0.
inline double stability_bare(const StationaryState& st) {
  const double M0 = st.M0;
  return 1.0 + phase_integral([&](double x, double v) {
           const double c = std::cos(x);
           return st.dG(0.5 * v * v - M0 * c) * c * c;
         });
}

// int G'(h0) sin^2 x; equals -1 on every self-consistent state.
inline double sine_moment(const StationaryState& st) {
  const double M0 = st.M0;
  return phase_integral([&](double x, double v) {
    const double s = std::sin(x);
    return st.dG(0.5 * v * v - M0 * std::cos(x)) * s * s;
  });
}

}  // namespace hmf
