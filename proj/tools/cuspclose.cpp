#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "cuspclose/errors.hpp"
#include "cuspclose/report.hpp"

int main(int argc, char** argv) {
  using namespace cuspclose;

  CLI::App app{"cusp closing workbench"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  app.add_option("--config", config_file, "flat key=value config file");

  // Overrides, applied after the config file in this order.
  const std::vector<std::pair<std::string, std::string>> flags = {
      {"--epsilon", "epsilon"}, {"--dim", "dim"},       {"--rank", "rank"},     {"--core-length", "core_length"},
      {"--i-max", "i_max"},     {"--mode", "mode"},     {"--samples", "samples"}, {"--fd-step", "fd_step"},
      {"--tol", "tol"},         {"--seed", "seed"},     {"--out", "output_dir"}, {"--order", "order"},
      {"--debug-corrupt-curvature", "debug_corrupt_curvature"}};
  std::map<std::string, std::string> values;
  for (const auto& [flag, key] : flags) app.add_option(flag, values[key]);

  std::vector<std::string> names = {"verify-hyperbolic", "min-order", "solve-smoothing", "curvature-scan", "assemble"};
  for (const auto& n : names) app.add_subcommand(n);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfigError;
  }

  RunConfig config;
  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw UsageError("cannot read config file " + config_file);
      std::stringstream ss;
      ss << in.rdbuf();
      apply_config_text(config, ss.str());
    }
    for (const auto& [flag, key] : flags)
      if (app.count(flag) > 0) apply_setting(config, key, values[key]);
  } catch (const UsageError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CommandResult result = run_command(command, config);
  std::cout << result.json;
  std::cerr << command << ": " << result.message << " (exit " << result.exit_code << ")\n";
  if (!config.output_dir.empty()) {
    try {
      write_artifacts(result, command, config.output_dir);
    } catch (const std::exception& e) {
      std::cerr << "write error: " << e.what() << "\n";
      return kExitConfigError;
    }
  }
  return result.exit_code;
}
