#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "hmf/cli.hpp"

using namespace hmf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hmflab_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string first_data_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') return line;
  return "";
}

io::json read_json(const fs::path& p) { return io::json::parse(slurp(p)); }

int run(const std::string& sub, const Config& c, const fs::path& out, std::string* err = nullptr) {
  std::ostringstream log, e;
  const int rc = cli::run(sub, c, out, log, e);
  if (err) *err = e.str();
  return rc;
}

Config short_time(double T, double t0) {
  Config c;
  c.set("time.T", std::to_string(T));
  c.set("time.fit_t0", std::to_string(t0));
  c.set("time.fit_t1", std::to_string(T));
  return c;
}

}  // namespace

TEST(Config, DefaultsFollowTheSchema) {
  Config c;
  EXPECT_EQ(c.str("state.profile"), "gaussian");
  EXPECT_EQ(c.real("state.alpha"), 0.3);
  EXPECT_EQ(c.integer("grid.L"), 64);
  EXPECT_EQ(c.real("grid.eps_sep"), 1e-8);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParseWithComments) {
  Config c;
  std::istringstream in("# header\nstate.beta = 5   # inline\n\n  time.dt=0.1\ndamp.r0 = wide\n");
  c.load(in);
  EXPECT_EQ(c.real("state.beta"), 5.0);
  EXPECT_EQ(c.real("time.dt"), 0.1);
  EXPECT_EQ(c.str("damp.r0"), "wide");
}

TEST(Config, RoundTrip) {
  Config a;
  a.set("state.alpha", "0.25");
  a.set("grid.n_theta", "1024");
  a.set("time.envelope", "3.5e0");
  std::istringstream in(a.serialize());
  Config b;
  b.load(in);
  EXPECT_EQ(a.serialize(), b.serialize());
  EXPECT_EQ(b.str("time.envelope"), "3.5");
}

TEST(Config, OverrideWinsOverFile) {
  Config c;
  std::istringstream in("state.beta = 5\n");
  c.load(in);
  c.apply_override("state.beta=6");
  EXPECT_EQ(c.real("state.beta"), 6.0);
  EXPECT_THROW(c.apply_override("state.beta"), ConfigError);
}

TEST(Config, UnknownKeyListsTheSchema) {
  Config c;
  try {
    c.set("no.such.key", "1");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("no.such.key"), std::string::npos);
    EXPECT_NE(m.find("grid.eps_sep"), std::string::npos);
    EXPECT_NE(m.find("scatter.n_phi"), std::string::npos);
  }
}

TEST(Config, ValueChecks) {
  Config c;
  EXPECT_THROW(c.set("grid.L", "-3"), ConfigError);
  EXPECT_THROW(c.set("grid.L", "2.5"), ConfigError);
  EXPECT_THROW(c.set("state.alpha", "0"), ConfigError);
  EXPECT_THROW(c.set("state.alpha", "nan"), ConfigError);
  EXPECT_THROW(c.set("state.profile", "maxwell"), ConfigError);
  EXPECT_THROW(c.set("time.envelope", "-1"), ConfigError);
  EXPECT_NO_THROW(c.set("state.y0", "-0.4"));
  std::istringstream bad("state.alpha 0.3\n");
  EXPECT_THROW(c.load(bad), ConfigError);
}

TEST(Config, CrossFieldChecks) {
  Config c = short_time(10.0, 20.0);
  EXPECT_THROW(c.validate(), ConfigError);
  Config d;
  d.set("grid.n_theta", "64");
  EXPECT_THROW(d.validate(), ConfigError);
  Config e;
  e.set("ellcheck.k_max", "1");
  EXPECT_THROW(e.validate(), ConfigError);
}

TEST(Config, SchemaFileMatchesTheListing) {
  const std::string text = slurp(fs::path(HMF_SOURCE_DIR) / "config" / "schema.txt");
  std::istringstream in(text);
  std::string line, body;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') body += line + "\n";
  EXPECT_EQ(body, schema_listing());
  Config c;
  c.load_file(std::string(HMF_SOURCE_DIR) + "/config/schema.txt");
  EXPECT_EQ(c.serialize(), Config().serialize());
}

TEST(Config, PresetFileLoads) {
  Config c;
  c.load_file(std::string(HMF_SOURCE_DIR) + "/config/preset.conf");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.real("state.beta"), 4.0);
}

TEST(Format, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.38637375975603394}) {
    const std::string s = format_real(x);
    EXPECT_EQ(std::stod(s), x) << s;
  }
  EXPECT_EQ(format_real(0.05), "0.05");
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  std::string err;
  EXPECT_EQ(run("plot", Config{}, scratch("unknown"), &err), cli::exit_usage);
  EXPECT_NE(err.find("plot"), std::string::npos);
}

TEST(Cli, InvalidConfigIsUsageError) {
  EXPECT_EQ(run("ellcheck", short_time(10.0, 20.0), scratch("invalid")), cli::exit_usage);
}

TEST(Cli, Ellcheck) {
  const auto out = scratch("ellcheck");
  EXPECT_EQ(run("ellcheck", Config{}, out), cli::exit_pass);
  const auto j = read_json(out / "ellcheck.json");
  EXPECT_TRUE(j["pass"].get<bool>());
  EXPECT_LT(j["identity_sn_cn"].get<double>(), 1e-11);
  EXPECT_EQ(j["bessel"]["violations"].get<int>(), 0);
  EXPECT_EQ(j["config"]["ellcheck.k_max"].get<double>(), 0.95);
  EXPECT_EQ(j["config"].size(), config_schema().size());
}

TEST(Cli, Equilibrium) {
  const auto out = scratch("equilibrium");
  EXPECT_EQ(run("equilibrium", Config{}, out), cli::exit_pass);
  const auto j = read_json(out / "equilibrium.json");
  EXPECT_LT(std::abs(j["residual"].get<double>()), 1e-10);
  EXPECT_GT(j["indicator"].get<double>(), 0.0);
  EXPECT_GT(j["sufficient"].get<double>(), 0.0);
  EXPECT_NEAR(j["sine_moment"].get<double>(), -1.0, 1e-9);
}

TEST(Cli, NoRootIsNumericFailure) {
  Config c;
  c.set("state.alpha", "0.45");
  std::string err;
  EXPECT_EQ(run("equilibrium", c, scratch("noroot"), &err), cli::exit_fail);
  EXPECT_NE(err.find("numeric failure"), std::string::npos);
}

TEST(Cli, SpectralIsDeterministic) {
  const auto a = scratch("spectral_a"), b = scratch("spectral_b");
  EXPECT_EQ(run("spectral", Config{}, a), cli::exit_pass);
  EXPECT_EQ(run("spectral", Config{}, b), cli::exit_pass);
  for (const char* name : {"spectral_eye.csv", "spectral_outer_upper.csv", "spectral_outer_lower.csv"}) {
    ASSERT_TRUE(fs::exists(a / name)) << name;
    EXPECT_EQ(slurp(a / name), slurp(b / name)) << name;
  }
  const std::string head = first_data_line(a / "spectral_eye.csv");
  EXPECT_EQ(head.rfind("h,omega,a,Cl_0,Cl_1,", 0), 0u);
  EXPECT_NE(head.find(",Sl_64"), std::string::npos);
  EXPECT_EQ(head.find("Sl_0"), std::string::npos);
  const auto j = read_json(a / "spectral.json");
  EXPECT_LT(j["max_parseval_defect"].get<double>(), 1e-8);
  EXPECT_TRUE(j["symplectic"]["pass"].get<bool>());
}

TEST(Cli, KernelsHeader) {
  const auto out = scratch("kernels");
  const int rc = run("kernels", short_time(10.0, 2.0), out);
  EXPECT_TRUE(rc == cli::exit_pass || rc == cli::exit_fail);
  EXPECT_EQ(first_data_line(out / "kernels.csv"), "t,K_C,K_S,Q_C,Q_S");
  std::ifstream in(out / "kernels.csv");
  std::string line;
  int rows = -1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 201);
  const auto j = read_json(out / "kernels.json");
  EXPECT_EQ(j["pass"].get<bool>(), rc == cli::exit_pass);
}

TEST(Cli, DampWritesItsContract) {
  const auto out = scratch("damp");
  Config c = short_time(30.0, 5.0);
  c.set("penrose.n_gamma", "31");
  c.set("penrose.n_tau", "10");
  const int rc = run("damp", c, out);
  ASSERT_TRUE(rc == cli::exit_pass || rc == cli::exit_fail);
  EXPECT_EQ(first_data_line(out / "damping.csv"), "t,C,S,F_C,F_S");
  const auto j = read_json(out / "damping.json");
  EXPECT_EQ(j["pass"].get<bool>(), rc == cli::exit_pass);
  for (const char* key : {"slopes", "fits", "targets", "penrose_ref", "flatness", "projection", "config"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["targets"]["C"].get<double>(), -3.0);
  EXPECT_LT(std::abs(j["ortho_defect_after"].get<double>()), 1e-8);
  EXPECT_TRUE(j["penrose_ref"]["pass"].get<bool>());
}

TEST(Cli, FlatnessMismatchIsNumericFailure) {
  Config c = short_time(30.0, 5.0);
  c.set("damp.p", "2");
  std::string err;
  EXPECT_EQ(run("damp", c, scratch("flat"), &err), cli::exit_fail);
  EXPECT_NE(err.find("flat"), std::string::npos);
}
