#include <iostream>

#include "CLI11.hpp"
#include "ringcap/runner.hpp"

int main(int argc, char** argv) {
  using namespace ringcap::runner;
  CLI::App app{"Discrete p-capacity experiments"};
  app.require_subcommand(1);
  std::string config_path;
  RunOptions options;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON experiment config")->required();
  app.add_option("--out", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "random seed, overrides the config");
  app.add_flag("--quiet", options.quiet, "suppress progress output");
  app.add_flag("--snap-critical", options.snap_critical, "treat p0 within --snap-tol of Q(x0) as critical");
  app.add_option("--snap-tol", options.snap_tolerance, "tolerance for --snap-critical")->check(CLI::PositiveNumber);
  for (const auto& name : task_names()) app.add_subcommand(name)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ExitCode::config_error;
  }
  options.out_dir = out_dir;
  if (*seed_opt) options.seed = seed;
  const std::string task = app.get_subcommands().front()->get_name();
  Json config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  }
  return run(task, config, options);
}
