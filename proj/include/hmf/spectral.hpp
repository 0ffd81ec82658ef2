#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hmf/actionangle.hpp"
#include "hmf/equilibria.hpp"
#include "hmf/errors.hpp"
#include "hmf/oscillatory.hpp"
#include "hmf/parallel.hpp"

namespace hmf {

// Frequency grids.  Each chart is integrated in the frequency variable:
// eye  : 1/omega uniform from the separatrix cutoff to h = 0, then
//        omega = omega_c - (omega_c - omega(0)) s^2 with s uniform;
// outer: 1/omega uniform from the cutoff to h = 3 M0, then uniform in omega
//        up to h = h_max.
// Each panel carries 5 nodes equispaced in omega.
struct GridConfig {
  int L = 64;
  int n_theta = 512;
  int n_theta_max = 8192;
  double eps_sep = 1e-8;  // separatrix cutoff, relative to M0
  double h_max = 200.0;   // outer truncation, relative to M0
  int eye_center_panels = 24;
  int eye_sep_panels = 96;
  int outer_sep_panels = 96;
  int outer_far_panels = 64;
  double parseval_tol = 1e-8;
  bool strict_parseval = true;
};

struct ChartTable {
  Chart chart = Chart::Eye;
  std::vector<Level> levels;
  std::vector<double> omega, dadw, gprime;
  std::vector<std::vector<double>> C, Sr;          // [node][l], l = 0..L
  std::vector<std::vector<std::vector<cplx>>> obs;  // [observable][node][l]
  std::vector<double> parseval_defect;
  int n_theta_used = 0;

  int nodes() const { return static_cast<int>(omega.size()); }
  int panels() const { return (nodes() - 1) / 4; }
  double panel_center(int p) const { return 0.5 * (omega[4 * p] + omega[4 * p + 4]); }
  double panel_half(int p) const { return 0.5 * (omega[4 * p + 4] - omega[4 * p]); }

  cplx cos_coef(int j, int l) const { return C[j][std::abs(l)]; }
  cplx sin_coef(int j, int l) const {
    const double r = l >= 0 ? Sr[j][l] : (chart == Chart::Eye ? Sr[j][-l] : -Sr[j][-l]);
    if (chart == Chart::Eye) return r;
    return cplx(0.0, -chart_sign(chart) * r);
  }
};

struct SpectralTable {
  double M0 = 1.0;
  GridConfig cfg;
  bool has_profile = false;
  std::array<ChartTable, 3> charts;  // eye, outer upper, outer lower
  std::vector<Observable> observables;
  double max_parseval_defect = 0.0;
  double max_tail = 0.0;

  int L() const { return cfg.L; }

  int observable_index(const std::string& name) const {
    for (std::size_t i = 0; i < observables.size(); ++i)
      if (observables[i].name == name) return static_cast<int>(i);
    return -1;
  }

  const ChartTable& chart(Chart c) const {
    return charts[c == Chart::Eye ? 0 : (c == Chart::OuterUpper ? 1 : 2)];
  }
};

namespace detail {

inline std::vector<double> panel_nodes_from_edges(const std::vector<double>& edges) {
  std::vector<double> out;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double a = edges[p], b = edges[p + 1];
    for (int i = 0; i < 4; ++i) out.push_back(a + (b - a) * i / 4.0);
  }
  out.push_back(edges.back());
  return out;
}

// Panel edges in ascending omega, uniform in 1/omega on [w0, w1].
inline void append_reciprocal(std::vector<double>& edges, double w0, double w1, int n) {
  const double y0 = 1.0 / w0, y1 = 1.0 / w1;
  for (int i = edges.empty() ? 0 : 1; i <= n; ++i) edges.push_back(i == n ? w1 : 1.0 / (y0 + (y1 - y0) * i / n));
}

inline void append_uniform(std::vector<double>& edges, double w0, double w1, int n) {
  for (int i = edges.empty() ? 0 : 1; i <= n; ++i) edges.push_back(i == n ? w1 : w0 + (w1 - w0) * i / n);
}

inline void append_graded_center(std::vector<double>& edges, double w0, double wc, int n) {
  for (int i = edges.empty() ? 0 : 1; i <= n; ++i) {
    const double s = 1.0 - double(i) / n;
    edges.push_back(i == n ? wc : wc - (wc - w0) * s * s);
  }
}

inline double mean_cos2(const Level& L, int n) {
  double s = 0.0;
  for (int j = 0; j < n; ++j) {
    const double c = cartesian(L, -pi + 2.0 * pi * j / n).cos_x;
    s += c * c;
  }
  return s / n;
}

}  // namespace detail

struct ChartGrid {
  std::vector<double> omega;
  std::vector<Level> levels;
};

inline ChartGrid eye_grid(double M0, const GridConfig& cfg) {
  const Level sep = eye_level_below_separatrix(M0, cfg.eps_sep * M0);
  const Level mid = eye_level(M0, 0.0);
  const double wc = std::sqrt(M0);
  std::vector<double> edges;
  detail::append_reciprocal(edges, sep.omega, mid.omega, cfg.eye_sep_panels);
  detail::append_graded_center(edges, mid.omega, wc, cfg.eye_center_panels);
  ChartGrid g;
  g.omega = detail::panel_nodes_from_edges(edges);
  const int mid_index = 4 * cfg.eye_sep_panels;
  for (std::size_t j = 0; j < g.omega.size(); ++j) {
    if (j == 0)
      g.levels.push_back(sep);
    else if (static_cast<int>(j) == mid_index)
      g.levels.push_back(mid);
    else if (j + 1 == g.omega.size())
      g.levels.push_back(eye_level(M0, -M0));
    else
      g.levels.push_back(level_from_frequency(Chart::Eye, M0, g.omega[j]));
    g.omega[j] = g.levels.back().omega;
  }
  return g;
}

inline ChartGrid outer_grid(double M0, const GridConfig& cfg) {
  const Level sep = outer_level_above_separatrix(M0, cfg.eps_sep * M0);
  const Level mid = outer_level(M0, 3.0 * M0);
  const Level far = outer_level(M0, cfg.h_max * M0);
  std::vector<double> edges;
  detail::append_reciprocal(edges, sep.omega, mid.omega, cfg.outer_sep_panels);
  detail::append_uniform(edges, mid.omega, far.omega, cfg.outer_far_panels);
  ChartGrid g;
  g.omega = detail::panel_nodes_from_edges(edges);
  const int mid_index = 4 * cfg.outer_sep_panels;
  for (std::size_t j = 0; j < g.omega.size(); ++j) {
    if (j == 0)
      g.levels.push_back(sep);
    else if (static_cast<int>(j) == mid_index)
      g.levels.push_back(mid);
    else if (j + 1 == g.omega.size())
      g.levels.push_back(far);
    else
      g.levels.push_back(level_from_frequency(Chart::OuterUpper, M0, g.omega[j]));
    g.omega[j] = g.levels.back().omega;
  }
  return g;
}

// Sum over l > L of |C_l|^2 + |S_l|^2 (both signs of l).
inline double coefficient_tail(const Level& L, int lmax) {
  double s = 0.0;
  for (int l = lmax + 1; l < lmax + 100000; ++l) {
    const double c = cos_coefficient(L, l), r = sin_coefficient_real(L, l);
    const double t = 2.0 * (c * c + r * r);
    s += t;
    if (t < 1e-30 * s || t == 0.0) break;
  }
  return s;
}

inline SpectralTable build_spectral_table(double M0, const std::function<double(double)>& dG,
                                          const std::vector<Observable>& observables, const GridConfig& cfg) {
  if (cfg.L < 1 || cfg.n_theta < 2 * cfg.L + 2) throw ConfigError("grid: need L >= 1 and n_theta >= 2L+2");
  if (!(cfg.eps_sep > 0.0 && cfg.eps_sep < 1.0)) throw ConfigError("grid: eps_sep must lie in (0,1)");
  if (!(cfg.h_max > 3.0)) throw ConfigError("grid: h_max must exceed 3 (units of M0)");
  if (cfg.eye_center_panels < 1 || cfg.eye_sep_panels < 1 || cfg.outer_sep_panels < 1 || cfg.outer_far_panels < 1)
    throw ConfigError("grid: panel counts must be positive");
  SpectralTable T;
  T.M0 = M0;
  T.cfg = cfg;
  T.has_profile = static_cast<bool>(dG);
  T.observables = observables;
  const int L = cfg.L;

  const ChartGrid eg = eye_grid(M0, cfg), og = outer_grid(M0, cfg);
  const std::array<Chart, 3> tags{Chart::Eye, Chart::OuterUpper, Chart::OuterLower};
  for (int ci = 0; ci < 3; ++ci) {
    ChartTable& ct = T.charts[ci];
    const ChartGrid& g = ci == 0 ? eg : og;
    ct.chart = tags[ci];
    ct.omega = g.omega;
    const int n = static_cast<int>(g.omega.size());
    ct.levels.resize(n);
    ct.dadw.resize(n);
    ct.gprime.assign(n, 0.0);
    ct.C.assign(n, std::vector<double>(L + 1));
    ct.Sr.assign(n, std::vector<double>(L + 1));
    ct.parseval_defect.assign(n, 0.0);
    for (int j = 0; j < n; ++j) {
      const Level lv = ci == 0 ? g.levels[j] : with_chart(g.levels[j], tags[ci]);
      ct.levels[j] = lv;
      ct.dadw[j] = lv.da_domega();
      if (dG) ct.gprime[j] = dG(lv.h);
      for (int l = 0; l <= L; ++l) {
        ct.C[j][l] = cos_coefficient(lv, l);
        ct.Sr[j][l] = sin_coefficient_real(lv, l);
      }
    }
  }

  // Parseval check, doubling the angle resolution where needed.
  int n_theta = cfg.n_theta;
  for (int ci = 0; ci < 2; ++ci) {
    ChartTable& ct = T.charts[ci];
    for (int j = 0; j < ct.nodes(); ++j) {
      const Level& lv = ct.levels[j];
      double sc = 0.0, ss = 0.0;
      for (int l = 0; l <= L; ++l) {
        const double w = l == 0 ? 1.0 : 2.0;
        sc += w * ct.C[j][l] * ct.C[j][l];
        ss += w * ct.Sr[j][l] * ct.Sr[j][l];
      }
      double defect = std::max(std::abs(sc - detail::mean_cos2(lv, n_theta)), std::abs(sc + ss - 1.0));
      while (defect >= cfg.parseval_tol && n_theta < cfg.n_theta_max) {
        n_theta *= 2;
        defect = std::max(std::abs(sc - detail::mean_cos2(lv, n_theta)), std::abs(sc + ss - 1.0));
      }
      ct.parseval_defect[j] = defect;
      T.max_parseval_defect = std::max(T.max_parseval_defect, defect);
      T.max_tail = std::max(T.max_tail, coefficient_tail(lv, L));
    }
  }
  T.charts[2].parseval_defect = T.charts[1].parseval_defect;
  if (cfg.strict_parseval && T.max_parseval_defect >= cfg.parseval_tol) {
    std::ostringstream os;
    os << "spectral table: Parseval defect " << T.max_parseval_defect << " exceeds " << cfg.parseval_tol
       << " (L=" << L << ", eps_sep=" << cfg.eps_sep << "); raise L or the separatrix cutoff";
    throw TruncationError(os.str());
  }

  for (auto& ct : T.charts) {
    ct.n_theta_used = n_theta;
    ct.obs.assign(observables.size(), {});
    for (std::size_t k = 0; k < observables.size(); ++k) {
      ct.obs[k].resize(ct.nodes());
      for (int j = 0; j < ct.nodes(); ++j) ct.obs[k][j] = angle_fourier(ct.levels[j], observables[k].f, L, n_theta);
    }
  }
  return T;
}

inline SpectralTable build_spectral_table(const StationaryState& st, const std::vector<Observable>& observables,
                                          const GridConfig& cfg) {
  return build_spectral_table(st.M0, st.profile.dG, observables, cfg);
}

// 1 + int G' cos^2 - sum over charts of int G' C_0^2 da.
inline double stability_indicator(const StationaryState& st, const SpectralTable& T);

// int over the chart of F(node) da, with F interpolated per panel.
template <class F>
double chart_integral(const ChartTable& ct, F&& fn) {
  double s = 0.0;
  for (int p = 0; p < ct.panels(); ++p) {
    std::array<double, 5> y{};
    for (int i = 0; i < 5; ++i) {
      const int j = 4 * p + i;
      y[i] = fn(j) * ct.dadw[j];
    }
    s += osc::plain_panel(osc::monomial_coeffs(y.data()), ct.panel_half(p));
  }
  return s;
}

template <class F>
double table_integral(const SpectralTable& T, F&& fn) {
  double s = 0.0;
  for (const auto& ct : T.charts) s += chart_integral(ct, [&](int j) { return fn(ct, j); });
  return s;
}

// Angle-Fourier coefficient accessor by name: "cos", "sin", "one" or a
// tabulated observable.
using CoefAccessor = std::function<cplx(const ChartTable&, int node, int l)>;

inline CoefAccessor coefficient_accessor(const SpectralTable& T, const std::string& name) {
  if (name == "cos") return [](const ChartTable& ct, int j, int l) { return ct.cos_coef(j, l); };
  if (name == "sin") return [](const ChartTable& ct, int j, int l) { return ct.sin_coef(j, l); };
  if (name == "one") return [](const ChartTable&, int, int l) { return cplx(l == 0 ? 1.0 : 0.0); };
  const int k = T.observable_index(name);
  if (k < 0) throw MisuseError("no tabulated rows for observable '" + name + "'");
  return [k](const ChartTable& ct, int j, int l) {
    const cplx c = ct.obs[k][j][std::abs(l)];
    return l >= 0 ? c : std::conj(c);
  };
}

// sum over charts of int f_0 phi_0 da.
inline double limit_functional(const SpectralTable& T, const std::string& f, const std::string& phi) {
  const auto F = coefficient_accessor(T, f), P = coefficient_accessor(T, phi);
  return table_integral(T, [&](const ChartTable& ct, int j) { return std::real(F(ct, j, 0) * std::conj(P(ct, j, 0))); });
}

// Z(t) = sum over charts and l of int a_l(omega) e^{-i l omega t} d omega,
// with a_l interpolated per panel.
struct OscillatorySum {
  struct Block {
    int l;
    double center, half;
    std::array<cplx, 5> coef;
  };
  std::vector<Block> blocks;

  cplx operator()(double t) const {
    cplx s = 0.0;
    for (const auto& b : blocks) s += osc::filon_panel(b.coef, b.center, b.half, -b.l * t);
    return s;
  }

  std::vector<cplx> evaluate(const std::vector<double>& ts) const {
    std::vector<cplx> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = (*this)(ts[i]);
    return out;
  }

  // Cauchy-type transform sum of int a_l(omega)/(zeta_l - omega) d omega
  // with zeta_l = map(l).
  template <class Map>
  cplx cauchy(Map&& zeta_of_l) const {
    cplx s = 0.0;
    for (const auto& b : blocks) s += osc::cauchy_panel(b.coef, b.center, b.half, zeta_of_l(b.l));
    return s;
  }

  cplx total() const {
    cplx s = 0.0;
    for (const auto& b : blocks) s += osc::plain_panel(b.coef, b.half);
    return s;
  }

  double max_frequency() const {
    double m = 0.0;
    for (const auto& b : blocks) m = std::max(m, b.l * (b.center + b.half));
    return m;
  }
};

// amp(chart table, node, l) gives the amplitude already multiplied by da/domega.
template <class Amp>
OscillatorySum make_oscillatory_sum(const SpectralTable& T, int lmin, int lmax, Amp&& amp, double rel_skip = 1e-17) {
  OscillatorySum S;
  std::vector<double> mags;
  double total = 0.0;
  for (const auto& ct : T.charts) {
    for (int l = lmin; l <= lmax; ++l) {
      for (int p = 0; p < ct.panels(); ++p) {
        std::array<cplx, 5> y{};
        double mag = 0.0;
        for (int i = 0; i < 5; ++i) {
          y[i] = amp(ct, 4 * p + i, l);
          mag += std::abs(y[i]);
        }
        mag *= ct.panel_half(p);
        if (mag == 0.0) continue;
        S.blocks.push_back({l, ct.panel_center(p), ct.panel_half(p), osc::monomial_coeffs(y.data())});
        mags.push_back(mag);
        total += mag;
      }
    }
  }
  OscillatorySum kept;
  for (std::size_t i = 0; i < S.blocks.size(); ++i)
    if (mags[i] > rel_skip * total) kept.blocks.push_back(S.blocks[i]);
  return kept;
}

// Several amplitudes on one set of (l, panel) blocks, so that the Filon
// moments are shared when evaluating them at the same time.
struct OscillatoryBank {
  struct Panel {
    int l;
    double center, half;
  };
  std::vector<Panel> panels;
  std::vector<std::vector<std::array<cplx, 5>>> coef;  // [amplitude][panel]

  std::size_t amplitudes() const { return coef.size(); }

  void evaluate(double t, cplx* out) const {
    const std::size_t m = coef.size();
    for (std::size_t k = 0; k < m; ++k) out[k] = 0.0;
    for (std::size_t p = 0; p < panels.size(); ++p) {
      const auto& b = panels[p];
      const double lambda = -b.l * t;
      const auto M = osc::filon_moments(lambda * b.half);
      const cplx ph = b.half * std::polar(1.0, lambda * b.center);
      for (std::size_t k = 0; k < m; ++k) {
        const auto& c = coef[k][p];
        out[k] += ph * (c[0] * M[0] + c[1] * M[1] + c[2] * M[2] + c[3] * M[3] + c[4] * M[4]);
      }
    }
  }

  // values[k][i] at times ts[i]
  std::vector<std::vector<cplx>> series(const std::vector<double>& ts) const {
    std::vector<std::vector<cplx>> out(coef.size(), std::vector<cplx>(ts.size()));
    parallel_for(ts.size(), [&](std::size_t i) {
      std::vector<cplx> v(coef.size());
      evaluate(ts[i], v.data());
      for (std::size_t k = 0; k < v.size(); ++k) out[k][i] = v[k];
    });
    return out;
  }

  OscillatorySum sum(std::size_t k) const {
    OscillatorySum s;
    for (std::size_t p = 0; p < panels.size(); ++p)
      s.blocks.push_back({panels[p].l, panels[p].center, panels[p].half, coef[k][p]});
    return s;
  }
};

using AmplitudeFn = std::function<cplx(const ChartTable&, int node, int l)>;

// A block is dropped when it is negligible for every amplitude.
inline OscillatoryBank make_oscillatory_bank(const SpectralTable& T, int lmin, int lmax,
                                             const std::vector<AmplitudeFn>& amps, double rel_skip = 1e-17) {
  const std::size_t m = amps.size();
  std::vector<OscillatoryBank::Panel> panels;
  std::vector<std::vector<std::array<cplx, 5>>> coef(m);
  std::vector<std::vector<double>> mags(m);
  std::vector<double> total(m, 0.0);
  for (const auto& ct : T.charts)
    for (int l = lmin; l <= lmax; ++l)
      for (int p = 0; p < ct.panels(); ++p) {
        panels.push_back({l, ct.panel_center(p), ct.panel_half(p)});
        for (std::size_t k = 0; k < m; ++k) {
          std::array<cplx, 5> y{};
          double mag = 0.0;
          for (int i = 0; i < 5; ++i) {
            y[i] = amps[k](ct, 4 * p + i, l);
            mag += std::abs(y[i]);
          }
          mag *= ct.panel_half(p);
          coef[k].push_back(osc::monomial_coeffs(y.data()));
          mags[k].push_back(mag);
          total[k] += mag;
        }
      }
  OscillatoryBank B;
  B.coef.resize(m);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    bool keep = false;
    for (std::size_t k = 0; k < m; ++k) keep = keep || (mags[k][p] > rel_skip * total[k] && mags[k][p] > 0.0);
    if (!keep) continue;
    B.panels.push_back(panels[p]);
    for (std::size_t k = 0; k < m; ++k) B.coef[k].push_back(coef[k][p]);
  }
  return B;
}

// Real pairing int f (phi o psi_t) = const + 2 Re Z(t) for real f, phi.
struct PairingSeries {
  double constant = 0.0;
  OscillatorySum osc;

  double operator()(double t) const { return constant + 2.0 * std::real(osc(t)); }
  std::vector<double> evaluate(const std::vector<double>& ts) const {
    std::vector<double> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) out[i] = (*this)(ts[i]);
    return out;
  }
};

inline PairingSeries pairing_series(const SpectralTable& T, const std::string& f, const std::string& phi) {
  const auto F = coefficient_accessor(T, f), P = coefficient_accessor(T, phi);
  PairingSeries ps;
  ps.constant = limit_functional(T, f, phi);
  ps.osc = make_oscillatory_sum(T, 1, T.L(), [&](const ChartTable& ct, int j, int l) {
    return F(ct, j, l) * std::conj(P(ct, j, l)) * ct.dadw[j];
  });
  return ps;
}

// Pairings of one f against several phi, evaluated on a common time grid.
struct PairingBank {
  std::vector<double> constants;
  OscillatoryBank bank;

  std::vector<std::vector<double>> series(const std::vector<double>& ts) const {
    const auto z = bank.series(ts);
    std::vector<std::vector<double>> out(z.size(), std::vector<double>(ts.size()));
    for (std::size_t k = 0; k < z.size(); ++k)
      for (std::size_t i = 0; i < ts.size(); ++i) out[k][i] = constants[k] + 2.0 * std::real(z[k][i]);
    return out;
  }
};

inline PairingBank pairing_bank(const SpectralTable& T, const std::string& f, const std::vector<std::string>& phis) {
  const auto F = coefficient_accessor(T, f);
  PairingBank pb;
  std::vector<AmplitudeFn> amps;
  for (const auto& phi : phis) {
    const auto P = coefficient_accessor(T, phi);
    pb.constants.push_back(limit_functional(T, f, phi));
    amps.push_back([F, P](const ChartTable& ct, int j, int l) { return F(ct, j, l) * std::conj(P(ct, j, l)) * ct.dadw[j]; });
  }
  pb.bank = make_oscillatory_bank(T, 1, T.L(), amps);
  return pb;
}

inline double stability_indicator(const StationaryState& st, const SpectralTable& T) {
  if (!T.has_profile || std::abs(T.M0 - st.M0) > 1e-13 * st.M0)
    throw MisuseError("stability_indicator: table was not built for this state");
  return stability_bare(st) - table_integral(T, [](const ChartTable& ct, int j) {
           return ct.gprime[j] * ct.C[j][0] * ct.C[j][0];
         });
}

}  // namespace hmf
