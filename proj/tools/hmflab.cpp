#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hmf/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Linear Landau damping laboratory for the HMF model"};
  app.require_subcommand(0, 1);
  std::string config_path, out_dir = "out";
  std::vector<std::string> overrides;
  bool print_schema = false, print_config = false;
  app.add_option("--config", config_path, "flat key = value configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--override", overrides, "key=value, applied after --config (repeatable)")->take_all();
  app.add_flag("--schema", print_schema, "print the configuration schema and exit");
  app.add_flag("--print-config", print_config, "print the resolved configuration and exit");
  for (const auto& s : hmf::cli::subcommands()) app.add_subcommand(s)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hmf::cli::exit_usage;
  }
  if (print_schema) {
    std::cout << hmf::schema_listing();
    return 0;
  }

  hmf::Config cfg;
  try {
    if (!config_path.empty()) cfg.load_file(config_path);
    for (const auto& o : overrides) cfg.apply_override(o);
  } catch (const std::exception& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return hmf::cli::exit_usage;
  }
  if (print_config) {
    std::cout << cfg.serialize();
    return 0;
  }
  if (app.get_subcommands().empty()) {
    std::cerr << app.help();
    return hmf::cli::exit_usage;
  }
  const std::string sub = app.get_subcommands().front()->get_name();
  return hmf::cli::run(sub, cfg, out_dir, std::cout, std::cerr);
}
