#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "hmf/config.hpp"
#include "hmf/errors.hpp"
#include "hmf/fit.hpp"

namespace hmf::io {

using json = nlohmann::json;

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

// Column-major CSV; `comment` lines are written first with a leading '#'.
inline void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
                      const std::vector<const std::vector<double>*>& cols, const std::vector<std::string>& comment = {}) {
  if (header.size() != cols.size()) throw MisuseError("write_csv: header and column counts differ");
  auto out = open_output(path);
  for (const auto& c : comment) out << "# " << c << "\n";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << "\n";
  const std::size_t n = cols.empty() ? 0 : cols[0]->size();
  for (const auto* c : cols)
    if (c->size() != n) throw MisuseError("write_csv: ragged columns");
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << format_real((*cols[i])[r]);
    out << "\n";
  }
}

// Typed view of the resolved configuration.
inline json config_json(const Config& cfg) {
  json j = json::object();
  for (const auto& e : config_schema()) {
    const std::string& v = cfg.str(e.key);
    if (e.type == "real")
      j[e.key] = cfg.real(e.key);
    else if (e.type == "int")
      j[e.key] = cfg.integer(e.key);
    else
      j[e.key] = v;
  }
  return j;
}

inline json fit_json(const RateFit& f) {
  return {{"slope", f.slope}, {"halfwidth", f.halfwidth}, {"points", f.points}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_output(path);
  out << j.dump(2) << "\n";
}

}  // namespace hmf::io
