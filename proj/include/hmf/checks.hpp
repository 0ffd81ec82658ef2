#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hmf/actionangle.hpp"
#include "hmf/bessel.hpp"
#include "hmf/elliptic.hpp"
#include "hmf/spectral.hpp"

namespace hmf {

// ---------------------------------------------------------------- elliptic identities

struct EllipticSuite {
  int n_u = 0, n_k = 0;
  double k_max = 0.0;
  double identity_sn_cn = 0.0;  // max |sn^2 + cn^2 - 1|
  double identity_dn = 0.0;     // max |dn^2 + k^2 sn^2 - 1|
  double series_gap = 0.0;      // max over am, sn, cn, dn of |series - inversion|
  double identity_tol = 1e-11, series_tol = 1e-9;
  bool pass = false;
};

// u runs over [-2K, 2K] at each k in (0, k_max].
inline EllipticSuite elliptic_suite(int n_u = 50, int n_k = 50, double k_max = 0.95, double identity_tol = 1e-11,
                                    double series_tol = 1e-9) {
  using namespace elliptic;
  EllipticSuite r;
  r.n_u = n_u;
  r.n_k = n_k;
  r.k_max = k_max;
  r.identity_tol = identity_tol;
  r.series_tol = series_tol;
  for (int i = 1; i <= n_k; ++i) {
    const double k = k_max * i / n_k;
    const Modulus md = Modulus::from_k(k);
    const Periods per = periods(md);
    const FourierSeries fs(md);
    for (int j = 0; j < n_u; ++j) {
      const double u = -2.0 * per.K + 4.0 * per.K * j / (n_u - 1);
      const auto e = jacobi_sn_cn_dn(u, md, per);
      r.identity_sn_cn = std::max(r.identity_sn_cn, std::abs(e.sn * e.sn + e.cn * e.cn - 1.0));
      r.identity_dn = std::max(r.identity_dn, std::abs(e.dn * e.dn + md.m * e.sn * e.sn - 1.0));
      const double gap = std::max({std::abs(fs.am(u) - e.am), std::abs(fs.sn(u) - e.sn), std::abs(fs.cn(u) - e.cn),
                                   std::abs(fs.dn(u) - e.dn)});
      r.series_gap = std::max(r.series_gap, gap);
    }
  }
  r.pass = r.identity_sn_cn < identity_tol && r.identity_dn < identity_tol && r.series_gap < series_tol;
  return r;
}

// ---------------------------------------------------------------- symplecticity

struct SymplecticReport {
  double max_defect = 0.0;  // max |det d(x,v)/d(theta,a) - 1|
  std::size_t points = 0;
  double band = 0.05, tol = 1e-5;
  bool pass = false;
};

// Central differences in theta and h, with d/da = omega d/dh, at the table
// nodes outside the band |h -+ M0| <= band M0.
inline SymplecticReport symplectic_check(const SpectralTable& T, int n_theta = 32, double band = 0.05,
                                         double tol = 1e-5) {
  SymplecticReport r;
  r.band = band;
  r.tol = tol;
  const double M0 = T.M0, dth = 1e-4;
  for (const auto& ct : T.charts) {
    for (int j = 0; j < ct.nodes(); ++j) {
      const Level& lv = ct.levels[j];
      if (std::abs(lv.h - M0) <= band * M0 || std::abs(lv.h + M0) <= band * M0) continue;
      const double dh = 1e-5 * std::max(M0, std::abs(lv.h));
      const Level lp = level(lv.chart, M0, lv.h + dh), lm = level(lv.chart, M0, lv.h - dh);
      for (int m = 0; m < n_theta; ++m) {
        const double th = -pi + 2.0 * pi * (m + 0.5) / n_theta;
        const auto a = to_cartesian(lv, th + dth), b = to_cartesian(lv, th - dth);
        const auto c = to_cartesian(lp, th), d = to_cartesian(lm, th);
        const double xt = (a.x - b.x) / (2.0 * dth), vt = (a.v - b.v) / (2.0 * dth);
        const double xa = lv.omega * (c.x - d.x) / (2.0 * dh), va = lv.omega * (c.v - d.v) / (2.0 * dh);
        r.max_defect = std::max(r.max_defect, std::abs(xt * va - xa * vt - 1.0));
        ++r.points;
      }
    }
  }
  r.pass = r.points > 0 && r.max_defect < tol;
  return r;
}

// ---------------------------------------------------------------- frequency asymptotics

struct FrequencyAsymptotics {
  double M0 = 0.0;
  double center_delta = 0.0, center_gap = 0.0;  // |omega(-M0+d) - (sqrt M0 - d/(8 sqrt M0))|
  double outer_h = 0.0, outer_gap = 0.0;        // |omega/sqrt(2h) - 1|
  // separatrix: omega log(1/d) / (c pi sqrt M0) with c = 2 (outer), 1 (eye),
  // worst relative gap over d in [1e-8, 1e-6] M0
  double log_law_outer = 0.0, log_law_eye = 0.0;
  // same with log(32 M0 / d), which carries the next-order constant
  double refined_outer = 0.0, refined_eye = 0.0;
  bool center = false, outer = false, log_law = false;
  bool pass = false;
};

inline FrequencyAsymptotics frequency_asymptotics(double M0, double center_tol = 1e-6, double outer_tol = 1e-3,
                                                  double log_tol = 0.05) {
  FrequencyAsymptotics r;
  r.M0 = M0;
  const double sq = std::sqrt(M0);
  r.center_delta = 1e-4 * M0;
  r.center_gap = std::abs(frequency(Chart::Eye, -M0 + r.center_delta, M0) - (sq - r.center_delta / (8.0 * sq)));
  r.outer_h = 1e4;
  r.outer_gap = std::abs(frequency(Chart::OuterUpper, r.outer_h, M0) / std::sqrt(2.0 * r.outer_h) - 1.0);
  for (int i = 0; i <= 20; ++i) {
    const double d = M0 * std::pow(10.0, -8.0 + 2.0 * i / 20);
    const double wo = outer_level_above_separatrix(M0, d).omega;
    const double we = eye_level_below_separatrix(M0, d).omega;
    r.log_law_outer = std::max(r.log_law_outer, std::abs(wo * std::log(1.0 / d) / (2.0 * pi * sq) - 1.0));
    r.log_law_eye = std::max(r.log_law_eye, std::abs(we * std::log(1.0 / d) / (pi * sq) - 1.0));
    r.refined_outer = std::max(r.refined_outer, std::abs(wo * std::log(32.0 * M0 / d) / (2.0 * pi * sq) - 1.0));
    r.refined_eye = std::max(r.refined_eye, std::abs(we * std::log(32.0 * M0 / d) / (pi * sq) - 1.0));
  }
  r.center = r.center_gap < center_tol;
  r.outer = r.outer_gap < outer_tol;
  r.log_law = r.log_law_outer < log_tol && r.log_law_eye < log_tol;
  r.pass = r.center && r.outer && r.log_law;
  return r;
}

// ---------------------------------------------------------------- Bessel inequalities

struct BesselSuite {
  int n_max = 5, points = 500;
  double z_min = 1e-3, z_max = 50.0;
  double min_margin_log_derivative = std::numeric_limits<double>::infinity();  // sqrt(z^2+n^2) - z I'/I
  double min_margin_ratio = std::numeric_limits<double>::infinity();           // I_{n+1}/I_n - bound
  int violations = 0;
  bool pass = false;
};

// z I_n'/I_n < sqrt(z^2 + n^2) and I_{n+1}/I_n > (sqrt((n+1)^2 + z^2) - (n+1))/z,
// at log-spaced z in (z_min, z_max].
inline BesselSuite bessel_inequalities(int n_max = 5, int points = 500, double z_min = 1e-3, double z_max = 50.0) {
  using elliptic::bessel_i;
  using elliptic::bessel_i_derivative;
  BesselSuite r;
  r.n_max = n_max;
  r.points = points;
  r.z_min = z_min;
  r.z_max = z_max;
  for (int n = 0; n <= n_max; ++n)
    for (int i = 1; i <= points; ++i) {
      const double z = z_min * std::pow(z_max / z_min, double(i) / points);
      const double in = bessel_i(n, z), in1 = bessel_i(n + 1, z);
      const double m1 = std::sqrt(z * z + n * n) - z * bessel_i_derivative(n, z) / in;
      const double m2 = in1 / in - z / (std::sqrt((n + 1.0) * (n + 1.0) + z * z) + (n + 1.0));
      r.min_margin_log_derivative = std::min(r.min_margin_log_derivative, m1 / std::sqrt(z * z + n * n));
      r.min_margin_ratio = std::min(r.min_margin_ratio, m2);
      if (!(m1 > 0.0) || !(m2 > 0.0)) ++r.violations;
    }
  r.pass = r.violations == 0;
  return r;
}

}  // namespace hmf
