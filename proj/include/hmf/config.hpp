#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hmf/errors.hpp"

namespace hmf {

// Shortest decimal string that reads back to the same double.
inline std::string format_real(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

struct SchemaEntry {
  std::string key;
  std::string type;        // real, int, string
  std::string fallback;    // default value
  std::string constraint;  // positive, nonnegative, any, or a |-separated list for strings
  std::string doc;
};

inline const std::vector<SchemaEntry>& config_schema() {
  static const std::vector<SchemaEntry> s{
      {"state.profile", "string", "gaussian", "gaussian|fermi", "stationary profile G"},
      {"state.alpha", "real", "0.3", "positive", "profile amplitude"},
      {"state.beta", "real", "4", "positive", "profile inverse temperature"},
      {"state.y0", "real", "0", "any", "fermi profile edge"},
      {"grid.L", "int", "64", "positive", "largest angle harmonic"},
      {"grid.n_theta", "int", "512", "positive", "angle samples per level"},
      {"grid.eps_sep", "real", "1e-08", "positive", "separatrix cutoff, units of M0"},
      {"grid.h_max", "real", "200", "positive", "outer truncation, units of M0"},
      {"grid.eye_center_panels", "int", "24", "positive", "eye panels between h = 0 and the centre"},
      {"grid.eye_sep_panels", "int", "96", "positive", "eye panels between the cutoff and h = 0"},
      {"grid.outer_sep_panels", "int", "96", "positive", "outer panels between the cutoff and h = 3 M0"},
      {"grid.outer_far_panels", "int", "64", "positive", "outer panels between h = 3 M0 and h_max"},
      {"time.dt", "real", "0.05", "positive", "time step"},
      {"time.T", "real", "200", "positive", "final time"},
      {"time.fit_t0", "real", "20", "positive", "start of the slope window"},
      {"time.fit_t1", "real", "200", "positive", "end of the slope window"},
      {"time.envelope", "real", "0", "nonnegative", "RMS envelope width, 0 for 2 pi / sqrt(M0)"},
      {"kernels.tol_C", "real", "0.4", "positive", "K_C slope tolerance around -3"},
      {"kernels.tol_S", "real", "0.3", "positive", "K_S slope tolerance around -2"},
      {"penrose.n_gamma", "int", "121", "positive", "real-part nodes"},
      {"penrose.n_tau", "int", "30", "positive", "imaginary-part nodes, log-spaced"},
      {"penrose.tau_min", "real", "0.001", "positive", "smallest |Im xi|"},
      {"penrose.B", "real", "0", "nonnegative", "half-width in Re xi, 0 for automatic"},
      {"penrose.tau_max", "real", "0", "nonnegative", "largest |Im xi|, 0 for B"},
      {"damp.r0", "string", "bump", "bump|bump2|wide|wide2|flat2|hbump|vsin|vcos", "initial perturbation"},
      {"damp.p", "int", "0", "nonnegative", "declared flatness order of r0"},
      {"damp.tol_C", "real", "0.5", "positive", "C slope tolerance"},
      {"damp.tol_S", "real", "0.3", "positive", "S slope tolerance"},
      {"dispersion.f", "string", "wide", "bump|bump2|wide|wide2|flat2|hbump|vsin|vcos", "first observable"},
      {"dispersion.phi", "string", "wide2", "bump|bump2|wide|wide2|flat2|hbump|vsin|vcos|cos|sin", "second observable"},
      {"dispersion.p", "int", "0", "nonnegative", "flatness order of f"},
      {"dispersion.q", "int", "0", "nonnegative", "flatness order of phi"},
      {"dispersion.tol", "real", "0.3", "positive", "slope tolerance"},
      {"scatter.T", "real", "300", "positive", "length of the damping run feeding g_inf"},
      {"scatter.n_theta", "int", "64", "positive", "angle samples of g_inf"},
      {"scatter.lmax", "int", "24", "positive", "harmonics kept in g_inf"},
      {"scatter.n_phi", "int", "1024", "positive", "table size of the L1 norm of d_s g"},
      {"scatter.n_samples", "int", "48", "positive", "sample times in the window"},
      {"scatter.tol", "real", "0.3", "positive", "slope tolerance around -1"},
      {"ellcheck.n_u", "int", "50", "positive", "u samples"},
      {"ellcheck.n_k", "int", "50", "positive", "k samples"},
      {"ellcheck.k_max", "real", "0.95", "positive", "largest modulus"},
      {"ellcheck.identity_tol", "real", "1e-11", "positive", "identity tolerance"},
      {"ellcheck.series_tol", "real", "1e-09", "positive", "series against inversion"},
      {"ellcheck.bessel_points", "int", "500", "positive", "z samples per order"},
  };
  return s;
}

inline const SchemaEntry* schema_entry(const std::string& key) {
  for (const auto& e : config_schema())
    if (e.key == key) return &e;
  return nullptr;
}

// Same layout as config/schema.txt.
inline std::string schema_listing() {
  std::ostringstream os;
  for (const auto& e : config_schema())
    os << e.key << " = " << e.fallback << "  # " << e.type << ", " << e.constraint << ": " << e.doc << "\n";
  return os.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::string normalize(const SchemaEntry& e, const std::string& raw) {
  const std::string v = trim(raw);
  auto bad = [&](const std::string& why) {
    return ConfigError("config: " + e.key + " = '" + v + "': " + why);
  };
  if (e.type == "string") {
    if (v.empty()) throw bad("empty value");
    if (e.constraint.find('|') != std::string::npos) {
      std::istringstream opts(e.constraint);
      std::string o;
      bool ok = false;
      while (std::getline(opts, o, '|')) ok = ok || o == v;
      if (!ok) throw bad("expected one of " + e.constraint);
    }
    return v;
  }
  if (e.type == "int") {
    long long n = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), n);
    if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size()) throw bad("not an integer");
    if (e.constraint == "positive" && n <= 0) throw bad("must be positive");
    if (e.constraint == "nonnegative" && n < 0) throw bad("must be nonnegative");
    return std::to_string(n);
  }
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (v.empty() || r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x)) throw bad("not a finite real");
  if (e.constraint == "positive" && !(x > 0.0)) throw bad("must be positive");
  if (e.constraint == "nonnegative" && !(x >= 0.0)) throw bad("must be nonnegative");
  return format_real(x);
}

}  // namespace detail

// Flat `section.key = value` configuration, validated against the schema.
class Config {
 public:
  Config() {
    for (const auto& e : config_schema()) values_[e.key] = detail::normalize(e, e.fallback);
  }

  void set(const std::string& key, const std::string& value) {
    const SchemaEntry* e = schema_entry(key);
    if (!e) throw ConfigError("config: unknown key '" + key + "'; valid keys:\n" + schema_listing());
    values_[key] = detail::normalize(*e, value);
  }

  // One `key = value` per line; `#` starts a comment.
  void load(std::istream& in, const std::string& origin = "<stream>") {
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
      set(detail::trim(line.substr(0, eq)), line.substr(eq + 1));
    }
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    load(in, path);
  }

  void apply_override(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
    set(detail::trim(kv.substr(0, eq)), kv.substr(eq + 1));
  }

  const std::string& str(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("config: unknown key '" + key + "'");
    return it->second;
  }
  double real(const std::string& key) const {
    const std::string& v = str(key);
    double x = 0.0;
    std::from_chars(v.data(), v.data() + v.size(), x);
    return x;
  }
  int integer(const std::string& key) const {
    const std::string& v = str(key);
    int n = 0;
    std::from_chars(v.data(), v.data() + v.size(), n);
    return n;
  }

  // Cross-field checks.
  void validate() const {
    const double T = real("time.T"), t0 = real("time.fit_t0"), t1 = real("time.fit_t1");
    if (!(t0 < t1 && t1 <= T)) throw ConfigError("config: fit window must satisfy 0 < fit_t0 < fit_t1 <= time.T");
    if (real("time.dt") >= t0) throw ConfigError("config: time.dt must be below fit_t0");
    if (integer("grid.n_theta") < 2 * integer("grid.L") + 2) throw ConfigError("config: grid.n_theta must be >= 2 L + 2");
    if (real("grid.eps_sep") >= 1.0) throw ConfigError("config: grid.eps_sep must be below 1");
    if (real("grid.h_max") <= 3.0) throw ConfigError("config: grid.h_max must exceed 3");
    if (real("ellcheck.k_max") >= 1.0) throw ConfigError("config: ellcheck.k_max must be below 1");
    if (integer("damp.p") > 3) throw ConfigError("config: damp.p must lie in 0..3");
    if (integer("scatter.n_theta") < 2 * integer("scatter.lmax") + 2)
      throw ConfigError("config: scatter.n_theta must be >= 2 lmax + 2");
    if (integer("scatter.lmax") > integer("grid.L")) throw ConfigError("config: scatter.lmax must not exceed grid.L");
    if (integer("penrose.n_gamma") < 2 || integer("penrose.n_tau") < 2)
      throw ConfigError("config: penrose resolutions must be at least 2");
  }

  // Schema order, normalized values.
  std::string serialize() const {
    std::ostringstream os;
    for (const auto& e : config_schema()) os << e.key << " = " << values_.at(e.key) << "\n";
    return os.str();
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace hmf
