#pragma once

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "hmf/checks.hpp"
#include "hmf/config.hpp"
#include "hmf/damping.hpp"
#include "hmf/equilibria.hpp"
#include "hmf/io.hpp"
#include "hmf/spectral.hpp"
#include "hmf/volterra.hpp"

namespace hmf::cli {

using io::json;
namespace fs = std::filesystem;

inline constexpr int exit_pass = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_fail = 2;

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s{"ellcheck", "equilibrium", "spectral", "kernels",
                                          "penrose",  "damp",        "dispersion", "scatter"};
  return s;
}

inline StationaryState state_from(const Config& c) {
  return solve_magnetization(Profile::named(c.str("state.profile"), c.real("state.alpha"), c.real("state.beta"),
                                            c.real("state.y0")));
}

inline GridConfig grid_from(const Config& c) {
  GridConfig g;
  g.L = c.integer("grid.L");
  g.n_theta = c.integer("grid.n_theta");
  g.eps_sep = c.real("grid.eps_sep");
  g.h_max = c.real("grid.h_max");
  g.eye_center_panels = c.integer("grid.eye_center_panels");
  g.eye_sep_panels = c.integer("grid.eye_sep_panels");
  g.outer_sep_panels = c.integer("grid.outer_sep_panels");
  g.outer_far_panels = c.integer("grid.outer_far_panels");
  return g;
}

inline Window window_from(const Config& c) { return {c.real("time.fit_t0"), c.real("time.fit_t1")}; }

inline double envelope_from(const Config& c, double M0) {
  const double w = c.real("time.envelope");
  return w > 0.0 ? w : default_envelope(M0);
}

inline PenroseConfig penrose_from(const Config& c) {
  PenroseConfig p;
  p.n_gamma = c.integer("penrose.n_gamma");
  p.n_tau = c.integer("penrose.n_tau");
  p.tau_min = c.real("penrose.tau_min");
  p.B = c.real("penrose.B");
  p.tau_max = c.real("penrose.tau_max");
  return p;
}

namespace detail {

inline const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

inline void line(std::ostream& log, const std::string& what, double value, const std::string& target, bool ok) {
  log << std::left << std::setw(34) << what << " " << std::setw(24) << format_real(value) << " " << std::setw(22)
      << target << " " << verdict(ok) << "\n";
}

inline json window_json(Window w) { return {w.t0, w.t1}; }

inline json penrose_json(const PenroseScan& sc) {
  return {{"min_KC", sc.min_c},
          {"min_KS", sc.min_s},
          {"at_xi", {{"KC", {sc.argmin_c.real(), sc.argmin_c.imag()}}, {"KS", {sc.argmin_s.real(), sc.argmin_s.imag()}}}},
          {"pass", sc.pass}};
}

inline json flatness_json(const FlatnessReport& f) {
  return {{"declared", f.declared}, {"max_derivative", f.max_derivative}, {"tol", f.tol}, {"holds", f.holds}};
}

// Table with the named observables (the built-in "cos", "sin" need no rows).
inline SpectralTable table_for(const StationaryState& st, const Config& c, const std::vector<std::string>& names) {
  std::vector<Observable> obs;
  for (const auto& n : names)
    if (n != "cos" && n != "sin") obs.push_back(named_observable(n, st.M0));
  return build_spectral_table(st, obs, grid_from(c));
}

inline DampingConfig damping_from(const Config& c, double M0, double T) {
  DampingConfig d;
  d.dt = c.real("time.dt");
  d.T = T;
  d.window = window_from(c);
  d.envelope = envelope_from(c, M0);
  d.p = c.integer("damp.p");
  d.tol_C = c.real("damp.tol_C");
  d.tol_S = c.real("damp.tol_S");
  return d;
}

}  // namespace detail

// ---------------------------------------------------------------- subcommands

inline int run_ellcheck(const Config& c, const fs::path& out, std::ostream& log) {
  const auto e = elliptic_suite(c.integer("ellcheck.n_u"), c.integer("ellcheck.n_k"), c.real("ellcheck.k_max"),
                                c.real("ellcheck.identity_tol"), c.real("ellcheck.series_tol"));
  const auto b = bessel_inequalities(5, c.integer("ellcheck.bessel_points"));
  const double itol = c.real("ellcheck.identity_tol");
  const std::string it = "< " + format_real(itol);
  detail::line(log, "sn^2 + cn^2 - 1", e.identity_sn_cn, it, e.identity_sn_cn < itol);
  detail::line(log, "dn^2 + k^2 sn^2 - 1", e.identity_dn, it, e.identity_dn < itol);
  detail::line(log, "series vs inversion", e.series_gap, "< " + format_real(e.series_tol), e.series_gap < e.series_tol);
  detail::line(log, "bessel z I'/I < sqrt(z^2+n^2) margin", b.min_margin_log_derivative, "> 0",
               b.min_margin_log_derivative > 0.0);
  detail::line(log, "bessel I_{n+1}/I_n bound margin", b.min_margin_ratio, "> 0", b.min_margin_ratio > 0.0);
  const bool pass = e.pass && b.pass;
  io::write_json(out / "ellcheck.json",
                 {{"identity_sn_cn", e.identity_sn_cn},
                  {"identity_dn", e.identity_dn},
                  {"series_gap", e.series_gap},
                  {"grid", {{"n_u", e.n_u}, {"n_k", e.n_k}, {"k_max", e.k_max}}},
                  {"bessel",
                   {{"n_max", b.n_max},
                    {"points", b.points},
                    {"min_margin_log_derivative", b.min_margin_log_derivative},
                    {"min_margin_ratio", b.min_margin_ratio},
                    {"violations", b.violations}}},
                  {"pass", pass},
                  {"config", io::config_json(c)}});
  return pass ? exit_pass : exit_fail;
}

inline int run_equilibrium(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const auto T = build_spectral_table(st, {}, grid_from(c));
  const double indicator = stability_indicator(st, T);
  const double sufficient = stability_sufficient(st);
  const double resid_tol = 1e-10 * std::max(1.0, st.M0);
  json j{{"M0", st.M0},
         {"residual", st.residual},
         {"indicator", indicator},
         {"sufficient", sufficient},
         {"bare", stability_bare(st)},
         {"sine_moment", sine_moment(st)},
         {"conditions",
          {{"zeta", st.conditions.zeta},
           {"first", st.conditions.first},
           {"first_value", st.conditions.first_value},
           {"second", st.conditions.second},
           {"second_value", st.conditions.second_value}}}};
  bool pass = std::abs(st.residual) < resid_tol && indicator > 0.0 && sufficient > 0.0;
  detail::line(log, "M0", st.M0, "", true);
  detail::line(log, "magnetization residual", std::abs(st.residual), "< " + format_real(resid_tol),
               std::abs(st.residual) < resid_tol);
  detail::line(log, "stability indicator", indicator, "> 0", indicator > 0.0);
  detail::line(log, "sufficient condition", sufficient, "> 0", sufficient > 0.0);
  if (st.profile.is_gaussian()) {
    const double closed = gaussian_sufficient_closed(st);
    double path_gap = 0.0;
    for (int i = 0; i <= 100; ++i) {
      const double z = 0.1 * i;
      const double closed_map = gaussian_map_closed(st.profile, z);
      path_gap = std::max(path_gap, std::abs(magnetization_map(st.profile, z) - closed_map) / std::max(1.0, std::abs(closed_map)));
    }
    j["sufficient_closed"] = closed;
    j["map_path_gap"] = path_gap;
    j["sufficient_path_gap"] = std::abs(closed - sufficient);
    detail::line(log, "sufficient (Bessel form)", closed, "> 0", closed > 0.0);
    detail::line(log, "quadrature vs Bessel map", path_gap, "< 1e-9", path_gap < 1e-9);
    pass = pass && closed > 0.0 && path_gap < 1e-9;
  }
  j["pass"] = pass;
  j["config"] = io::config_json(c);
  io::write_json(out / "equilibrium.json", j);
  return pass ? exit_pass : exit_fail;
}

inline int run_spectral(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const auto T = build_spectral_table(st, {}, grid_from(c));
  const int L = T.L();
  for (const auto& ct : T.charts) {
    const int n = ct.nodes();
    std::vector<std::vector<double>> cols(3 + (L + 1) + L, std::vector<double>(n));
    std::vector<std::string> head{"h", "omega", "a"};
    for (int l = 0; l <= L; ++l) head.push_back("Cl_" + std::to_string(l));
    for (int l = 1; l <= L; ++l) head.push_back("Sl_" + std::to_string(l));
    for (int j = 0; j < n; ++j) {
      cols[0][j] = ct.levels[j].h;
      cols[1][j] = ct.omega[j];
      cols[2][j] = ct.levels[j].action;
      for (int l = 0; l <= L; ++l) cols[3 + l][j] = ct.C[j][l];
      for (int l = 1; l <= L; ++l) cols[3 + L + l][j] = ct.Sr[j][l];
    }
    std::vector<const std::vector<double>*> ptr;
    for (const auto& v : cols) ptr.push_back(&v);
    const std::string name = chart_name(ct.chart);
    const std::string note =
        ct.chart == Chart::Eye
            ? "chart=" + name + " M0=" + format_real(T.M0) + "; Cl, Sl are the real angle-Fourier coefficients of cos x, sin x"
            : "chart=" + name + " M0=" + format_real(T.M0) + "; Cl real, sin coefficient is -i*sign*Sl with sign=" +
                  std::to_string(chart_sign(ct.chart));
    io::write_csv(out / ("spectral_" + name + ".csv"), head, ptr, {note});
  }
  const auto sy = symplectic_check(T);
  const auto fa = frequency_asymptotics(T.M0);
  const bool parseval = T.max_parseval_defect < T.cfg.parseval_tol;
  detail::line(log, "Parseval defect", T.max_parseval_defect, "< " + format_real(T.cfg.parseval_tol), parseval);
  detail::line(log, "symplectic Jacobian defect", sy.max_defect, "< " + format_real(sy.tol), sy.pass);
  detail::line(log, "eye-centre frequency gap", fa.center_gap, "< 1e-6", fa.center);
  detail::line(log, "outer omega/sqrt(2h) - 1", fa.outer_gap, "< 1e-3", fa.outer);
  detail::line(log, "separatrix log law (outer)", fa.log_law_outer, "< 0.05 (info)", fa.log_law_outer < 0.05);
  detail::line(log, "separatrix log law (eye)", fa.log_law_eye, "< 0.05 (info)", fa.log_law_eye < 0.05);
  const bool pass = parseval && sy.pass && fa.center && fa.outer;
  io::write_json(out / "spectral.json",
                 {{"M0", T.M0},
                  {"L", L},
                  {"n_theta_used", T.charts[0].n_theta_used},
                  {"nodes", {T.charts[0].nodes(), T.charts[1].nodes(), T.charts[2].nodes()}},
                  {"max_parseval_defect", T.max_parseval_defect},
                  {"max_tail", T.max_tail},
                  {"symplectic", {{"max_defect", sy.max_defect}, {"points", sy.points}, {"pass", sy.pass}}},
                  {"frequency",
                   {{"center_gap", fa.center_gap},
                    {"outer_gap", fa.outer_gap},
                    {"log_law_outer", fa.log_law_outer},
                    {"log_law_eye", fa.log_law_eye},
                    {"refined_log_law_outer", fa.refined_outer},
                    {"refined_log_law_eye", fa.refined_eye}}},
                  {"pass", pass},
                  {"config", io::config_json(c)}});
  return pass ? exit_pass : exit_fail;
}

inline int run_kernels(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const auto T = build_spectral_table(st, {}, grid_from(c));
  const auto ks = kernel_series(T, TimeGrid(c.real("time.dt"), c.real("time.T")));
  io::write_csv(out / "kernels.csv", {"t", "K_C", "K_S", "Q_C", "Q_S"}, {&ks.t, &ks.K_C, &ks.K_S, &ks.Q_C, &ks.Q_S});
  const Window w = window_from(c);
  const double W = envelope_from(c, st.M0);
  const auto fc = fit_envelope_rate(ks.t, ks.K_C, w, W), fs_ = fit_envelope_rate(ks.t, ks.K_S, w, W);
  const double tc = c.real("kernels.tol_C"), ts = c.real("kernels.tol_S");
  const bool pc = std::abs(fc.slope + 3.0) <= tc, ps = std::abs(fs_.slope + 2.0) <= ts;
  detail::line(log, "|K_C| slope", fc.slope, "-3 +- " + format_real(tc), pc);
  detail::line(log, "|K_S| slope", fs_.slope, "-2 +- " + format_real(ts), ps);
  io::write_json(out / "kernels.json", {{"slopes", {{"K_C", fc.slope}, {"K_S", fs_.slope}}},
                                        {"fits", {{"K_C", io::fit_json(fc)}, {"K_S", io::fit_json(fs_)}}},
                                        {"targets", {{"K_C", -3.0}, {"K_S", -2.0}}},
                                        {"tolerances", {{"K_C", tc}, {"K_S", ts}}},
                                        {"window", detail::window_json(w)},
                                        {"envelope", W},
                                        {"Q0", ks.Q0},
                                        {"one_plus_QC0", 1.0 + ks.Q_C[0]},
                                        {"pass", pc && ps},
                                        {"config", io::config_json(c)}});
  return pc && ps ? exit_pass : exit_fail;
}

inline int run_penrose(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const auto T = build_spectral_table(st, {}, grid_from(c));
  const auto op = kernel_operators(T);
  const auto sc = penrose_scan(op, penrose_from(c));
  std::vector<double> re, im, ac, as;
  for (const auto& n : sc.nodes) {
    re.push_back(n.re);
    im.push_back(n.im);
    ac.push_back(n.abs_c);
    as.push_back(n.abs_s);
  }
  io::write_csv(out / "penrose.csv", {"re_xi", "im_xi", "abs_one_minus_KC", "abs_one_minus_KS"}, {&re, &im, &ac, &as});
  const double consistency = std::abs(sc.one_minus_kc0 - (1.0 + op.Q_C(0.0)));
  const auto tc = hat_time_domain_check(T, op, cplx(1.0, -0.5));
  const auto q4 = fourth_quadrant_check(op);
  detail::line(log, "min |1 - K^_C|", sc.min_c, "> 0", sc.min_c > 0.0);
  detail::line(log, "min |1 - K^_S|", sc.min_s, "> 0", sc.min_s > 0.0);
  detail::line(log, "outer-region bound B", sc.B, "", sc.outer_bound);
  detail::line(log, "|(1-K^_C(0)) - (1+Q_C(0))|", consistency, "< 1e-8", consistency < 1e-8);
  detail::line(log, "K^_C(1-0.5i) vs time domain", tc.gap, "< 1e-4", tc.gap < 1e-4);
  detail::line(log, "max Im K^_C, fourth quadrant", q4.max_imag, "< 0", q4.pass);
  json j = detail::penrose_json(sc);
  j["B"] = sc.B;
  j["tau_max"] = sc.tau_max;
  j["bound_constant"] = sc.bound_constant;
  j["outer_bound"] = sc.outer_bound;
  j["one_minus_KC0"] = sc.one_minus_kc0;
  j["one_minus_KS0"] = sc.one_minus_ks0;
  j["one_plus_QC0"] = 1.0 + op.Q_C(0.0);
  j["axis_limit"] = {{"KC", sc.axis_limit_c}, {"KS", sc.axis_limit_s}};
  j["resonance_errors"] = sc.resonance_errors;
  j["time_domain_check"] = {{"xi", {1.0, -0.5}},
                            {"spectral", {tc.spectral.real(), tc.spectral.imag()}},
                            {"quadrature", {tc.quadrature.real(), tc.quadrature.imag()}},
                            {"gap", tc.gap}};
  j["fourth_quadrant_max_imag"] = q4.max_imag;
  j["config"] = io::config_json(c);
  io::write_json(out / "penrose.json", j);
  return sc.pass ? exit_pass : exit_fail;
}

inline json damping_json(const DampingReport& rep, const PenroseScan& sc, const FlatnessReport& fl) {
  return {{"p", rep.p},
          {"slopes", {{"C", rep.fit_C.slope}, {"S", rep.fit_S.slope}, {"FC", rep.fit_FC.slope}, {"FS", rep.fit_FS.slope}}},
          {"fits",
           {{"C", io::fit_json(rep.fit_C)},
            {"S", io::fit_json(rep.fit_S)},
            {"FC", io::fit_json(rep.fit_FC)},
            {"FS", io::fit_json(rep.fit_FS)}}},
          {"targets", {{"C", rep.target_C}, {"S", rep.target_S}}},
          {"tolerances", {{"C", rep.config.tol_C}, {"S", rep.config.tol_S}}},
          {"pass", rep.pass},
          {"pass_C", rep.pass_C},
          {"pass_S", rep.pass_S},
          {"hierarchy", rep.hierarchy},
          {"penrose_ref", detail::penrose_json(sc)},
          {"ortho_defect_before", rep.ortho_before},
          {"ortho_defect_after", rep.ortho_after},
          {"ortho_defect_max_along_run", rep.ortho_max_along_run},
          {"volterra_residual", rep.volterra_residual},
          {"resolvent_gap", rep.resolvent_gap},
          {"flatness", detail::flatness_json(fl)},
          {"window", detail::window_json(rep.config.window)},
          {"envelope", rep.config.envelope}};
}

inline int run_damp(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const std::string r0 = c.str("damp.r0");
  auto T = detail::table_for(st, c, {r0});
  const auto fl = verify_flatness(T.observables[0].f, c.integer("damp.p"));
  if (!fl.holds) throw PreconditionError("damp: r0 '" + r0 + "' is not flat to the declared order p");
  const auto pr = orthogonal_projection(T, r0);
  const auto sc = penrose_scan(kernel_operators(T), penrose_from(c));
  const auto rep = linear_damping_run(T, pr.name, detail::damping_from(c, st.M0, c.real("time.T")), &sc, &pr);
  io::write_csv(out / "damping.csv", {"t", "C", "S", "F_C", "F_S"}, {&rep.t, &rep.C, &rep.S, &rep.F_C, &rep.F_S});
  detail::line(log, "|C| slope", rep.fit_C.slope, format_real(rep.target_C) + " +- " + format_real(rep.config.tol_C), rep.pass_C);
  detail::line(log, "|S| slope", rep.fit_S.slope, "-2 +- " + format_real(rep.config.tol_S), rep.pass_S);
  detail::line(log, "|F_C| slope", rep.fit_FC.slope, "(info)", true);
  detail::line(log, "|F_S| slope", rep.fit_FS.slope, "(info)", true);
  detail::line(log, "orthogonality defect after", std::abs(rep.ortho_after), "< 1e-8", std::abs(rep.ortho_after) < 1e-8);
  detail::line(log, "orthogonality defect along run", rep.ortho_max_along_run, "< 1e-8", rep.ortho_max_along_run < 1e-8);
  json j = damping_json(rep, sc, fl);
  j["projection"] = {{"c", pr.c}, {"overlap", pr.overlap}};
  j["config"] = io::config_json(c);
  io::write_json(out / "damping.json", j);
  return rep.pass ? exit_pass : exit_fail;
}

inline int run_dispersion(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const std::string f = c.str("dispersion.f"), phi = c.str("dispersion.phi");
  const int p = c.integer("dispersion.p"), q = c.integer("dispersion.q");
  const auto T = detail::table_for(st, c, {f, phi});
  auto flat = [&](const std::string& name, int order) {
    if (name == "cos" || name == "sin") return FlatnessReport{order, {}, 1e-6, true};
    return verify_flatness(named_observable(name, st.M0).f, order);
  };
  const auto ff = flat(f, p), fp = flat(phi, q);
  if (!ff.holds || !fp.holds) throw PreconditionError("dispersion: observables are not flat to the declared orders");
  const auto r = dispersion_experiment(T, f, phi, p, q, TimeGrid(c.real("time.dt"), c.real("time.T")), window_from(c),
                                       envelope_from(c, st.M0), c.real("dispersion.tol"));
  std::vector<double> dev(r.t.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = r.pairing[i] - r.limit;
  io::write_csv(out / "dispersion.csv", {"t", "pairing", "deviation"}, {&r.t, &r.pairing, &dev});
  detail::line(log, "|pairing - limit| slope", r.fit.slope, format_real(r.target) + " +- " + format_real(r.tol), r.pass);
  detail::line(log, "block maxima decrease", r.monotone_maxima ? 1.0 : 0.0, "(info)", r.monotone_maxima);
  io::write_json(out / "dispersion.json", {{"f", f},
                                           {"phi", phi},
                                           {"p", p},
                                           {"q", q},
                                           {"slope", r.fit.slope},
                                           {"fit", io::fit_json(r.fit)},
                                           {"target", r.target},
                                           {"tol", r.tol},
                                           {"limit", r.limit},
                                           {"pairing_at_0", r.pairing.front()},
                                           {"monotone_maxima", r.monotone_maxima},
                                           {"flatness", {{"f", detail::flatness_json(ff)}, {"phi", detail::flatness_json(fp)}}},
                                           {"window", detail::window_json(window_from(c))},
                                           {"pass", r.pass},
                                           {"config", io::config_json(c)}});
  return r.pass ? exit_pass : exit_fail;
}

inline int run_scatter(const Config& c, const fs::path& out, std::ostream& log) {
  const auto st = state_from(c);
  const std::string r0 = c.str("damp.r0");
  auto T = detail::table_for(st, c, {r0});
  const auto pr = orthogonal_projection(T, r0);
  const auto sc = penrose_scan(kernel_operators(T), penrose_from(c));
  const auto rep = linear_damping_run(T, pr.name, detail::damping_from(c, st.M0, c.real("scatter.T")), &sc, &pr);
  ScatterConfig sg;
  sg.n_theta = c.integer("scatter.n_theta");
  sg.lmax = c.integer("scatter.lmax");
  sg.n_phi = c.integer("scatter.n_phi");
  sg.n_samples = c.integer("scatter.n_samples");
  sg.window = window_from(c);
  sg.tol = c.real("scatter.tol");
  const auto res = scattering_state(T, rep, pr.name, sg);
  io::write_csv(out / "scatter.csv", {"t", "distance", "majorant"}, {&res.t_sample, &res.distance, &res.majorant});
  {
    std::vector<double> chart, h, w, a, r;
    for (std::size_t k = 0; k < res.charts.size(); ++k)
      for (std::size_t j = 0; j < res.charts[k].h.size(); ++j) {
        chart.push_back(double(k));
        h.push_back(res.charts[k].h[j]);
        w.push_back(res.charts[k].omega[j]);
        a.push_back(res.charts[k].action[j]);
        r.push_back(res.charts[k].r_inf[j]);
      }
    io::write_csv(out / "rinf.csv", {"chart", "h", "omega", "a", "r_inf"}, {&chart, &h, &w, &a, &r},
                  {"chart 0 = eye, 1 = outer_upper, 2 = outer_lower"});
  }
  detail::line(log, "||g(t) - g_inf||_1 slope", res.distance_fit.slope, "-1 +- " + format_real(sg.tol),
               std::abs(res.distance_fit.slope + 1.0) <= sg.tol);
  detail::line(log, "majorant slope", res.majorant_fit.slope, "(info)", true);
  detail::line(log, "r_inf theta variance", res.rinf_theta_variance, "< 1e-6", res.rinf_theta_variance < 1e-6);
  io::write_json(out / "scatter.json", {{"slopes", {{"distance", res.distance_fit.slope}, {"majorant", res.majorant_fit.slope}}},
                                        {"fits", {{"distance", io::fit_json(res.distance_fit)}, {"majorant", io::fit_json(res.majorant_fit)}}},
                                        {"target", sg.target},
                                        {"tol", sg.tol},
                                        {"tail_amplitude", res.tail_amplitude},
                                        {"tail_bound", res.tail_bound},
                                        {"rinf_theta_variance", res.rinf_theta_variance},
                                        {"weak_limit_cos", res.weak_limit_cos},
                                        {"final_C", res.final_C},
                                        {"damping", {{"slopes", {{"C", rep.fit_C.slope}, {"S", rep.fit_S.slope}}}, {"T", rep.config.T}}},
                                        {"window", detail::window_json(sg.window)},
                                        {"pass", res.pass},
                                        {"config", io::config_json(c)}});
  return res.pass ? exit_pass : exit_fail;
}

// Runs one subcommand; returns the process exit status.
inline int run(const std::string& sub, const Config& c, const fs::path& out, std::ostream& log, std::ostream& err) {
  try {
    c.validate();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw ConfigError("cannot create output directory '" + out.string() + "': " + ec.message());
    if (sub == "ellcheck") return run_ellcheck(c, out, log);
    if (sub == "equilibrium") return run_equilibrium(c, out, log);
    if (sub == "spectral") return run_spectral(c, out, log);
    if (sub == "kernels") return run_kernels(c, out, log);
    if (sub == "penrose") return run_penrose(c, out, log);
    if (sub == "damp") return run_damp(c, out, log);
    if (sub == "dispersion") return run_dispersion(c, out, log);
    if (sub == "scatter") return run_scatter(c, out, log);
    throw ConfigError("unknown subcommand '" + sub + "'");
  } catch (const ConfigError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const MisuseError& e) {
    err << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    err << "numeric failure: " << e.what() << "\n";
    return exit_fail;
  }
}

}  // namespace hmf::cli
