#include <CLI11.hpp>

#include <iostream>

#include "portthermo/cli.hpp"

namespace cli = portthermo::cli;

int main(int argc, char** argv) {
  cli::configure_logging();
  CLI::App app{"Port-thermodynamic systems: validation, simulation and Lyapunov certificates"};
  app.require_subcommand(1);

  cli::RunOptions opt;
  std::string out_dir;
  std::uint64_t seed = 0;
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config, "config file (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "sampling seed (overrides the config)");
    sub->add_option("--jobs", opt.jobs, "worker threads; 0 uses every core")->default_val(1);
  };
  auto* validate = app.add_subcommand("validate", "check the structural conditions of a system");
  auto* simulate = app.add_subcommand("simulate", "integrate a system and write its trajectory as CSV");
  auto* lyapunov = app.add_subcommand("lyapunov", "sample a Lyapunov certificate along a simulated run");
  add_run_flags(validate);
  add_run_flags(simulate);
  add_run_flags(lyapunov);
  auto* list = app.add_subcommand("list", "list the built-in scenarios and their parameters");
  auto* exporter = app.add_subcommand("export", "write a config file reproducing a built-in scenario");
  std::string scenario;
  exporter->add_option("scenario", scenario, "scenario name")->required();
  exporter->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::kConfigError;
  }

  for (auto* sub : {validate, simulate, lyapunov}) {
    if (!sub->parsed()) continue;
    if (!out_dir.empty()) opt.out = out_dir;
    if (sub->count("--seed")) opt.seed = seed;
    if (sub == validate) return cli::cmd_validate(opt, std::cout, std::cerr);
    if (sub == simulate) return cli::cmd_simulate(opt, std::cout, std::cerr);
    return cli::cmd_lyapunov(opt, std::cout, std::cerr);
  }
  if (list->parsed()) return cli::cmd_list(std::cout);
  const std::filesystem::path dir = out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(out_dir);
  return cli::cmd_export(scenario, dir / (scenario + ".json"), std::cout, std::cerr);
}
