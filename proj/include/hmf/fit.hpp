#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "hmf/errors.hpp"

namespace hmf {

struct Window {
  double t0 = 20.0;
  double t1 = 200.0;
};

struct RateFit {
  double slope = 0.0;
  double halfwidth = 0.0;  // two standard errors
  double intercept = 0.0;
  std::size_t points = 0;
};

// Least-squares slope of log y against log t on the window; y must be positive there.
inline RateFit fit_algebraic_rate(const std::vector<double>& t, const std::vector<double>& y, Window w) {
  if (t.size() != y.size()) throw MisuseError("fit_algebraic_rate: length mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < w.t0 || t[i] > w.t1) continue;
    if (!(y[i] > 0.0)) {
      std::ostringstream os;
      os << "fit_algebraic_rate: nonpositive value " << y[i] << " at t=" << t[i] << " inside the window";
      throw DomainError(os.str());
    }
    const double lx = std::log(t[i]), ly = std::log(y[i]);
    pts.push_back({lx, ly});
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 3) throw DomainError("fit_algebraic_rate: fewer than 3 points in the window");
  RateFit r;
  r.points = n;
  const double d = n * sxx - sx * sx;
  r.slope = (n * sxy - sx * sy) / d;
  r.intercept = (sy - r.slope * sx) / n;
  double ss = 0.0;
  for (auto [lx, ly] : pts) {
    const double e = ly - r.intercept - r.slope * lx;
    ss += e * e;
  }
  const double sigma2 = ss / double(n - 2);
  r.halfwidth = 2.0 * std::sqrt(sigma2 * n / d);
  return r;
}

// Running root-mean-square of y over a centred window of width W.
inline std::vector<double> rms_envelope(const std::vector<double>& t, const std::vector<double>& y, double W) {
  const std::size_t n = y.size();
  std::vector<double> cum(n + 1, 0.0), out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) cum[i + 1] = cum[i] + y[i] * y[i];
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (lo < n && t[lo] < t[i] - 0.5 * W) ++lo;
    while (hi < n && t[hi] <= t[i] + 0.5 * W) ++hi;
    out[i] = std::sqrt((cum[hi] - cum[lo]) / double(hi - lo));
  }
  return out;
}

// Slope of an oscillating series, fitted on its RMS envelope.
inline RateFit fit_envelope_rate(const std::vector<double>& t, const std::vector<double>& y, Window w, double W) {
  return fit_algebraic_rate(t, rms_envelope(t, y, W), w);
}

}  // namespace hmf
