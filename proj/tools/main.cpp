// risthz: link-level simulator for RIS-aided terahertz multi-user MIMO
// with hybrid 3D beamforming and UWB-assisted beam alignment.
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "risthz/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"RIS-aided THz multi-user MIMO link simulator"};
  app.require_subcommand(1);

  risthz::SimulateOptions sim;
  sim.out_dir = "out";
  std::uint64_t seed_flag = 0;
  int trials_flag = 0;

  auto* simulate = app.add_subcommand(
      "simulate", "Run the power sweep for every variant in the config");
  simulate->add_option("-c,--config", sim.config_path, "Scenario config file")
      ->required();
  simulate->add_option("-o,--out", sim.out_dir,
                       "Output directory (CSV per variant + manifest.json)");
  auto* seed_opt =
      simulate->add_option("--seed", seed_flag, "Override the config seed");
  auto* trials_opt = simulate->add_option("--trials", trials_flag,
                                          "Override the per-point trial count");

  std::string geo_config;
  auto* geometry = app.add_subcommand(
      "geometry", "Print derived geometry (spacings, field regimes, angles)");
  geometry->add_option("-c,--config", geo_config, "Scenario config file")
      ->required();

  std::vector<int> sizes{3, 9, 27, 81};
  auto* complexity = app.add_subcommand(
      "complexity", "Print the beam-search cost table for codebook sizes");
  complexity->add_option("--n,--sizes", sizes, "Codebook sizes to tabulate")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? risthz::kExitOk : risthz::kExitConfigError;
  }

  if (simulate->parsed()) {
    if (seed_opt->count() > 0) sim.seed = seed_flag;
    if (trials_opt->count() > 0) sim.trials = trials_flag;
    return risthz::cmd_simulate(sim, std::cerr);
  }
  if (geometry->parsed()) return risthz::cmd_geometry(geo_config, std::cout, std::cerr);
  if (complexity->parsed())
    return risthz::cmd_complexity(sizes, std::cout, std::cerr);
  return risthz::kExitConfigError;
}
