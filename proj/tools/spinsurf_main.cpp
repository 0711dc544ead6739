// Command-line front end.
//
// Exit codes: 0 success, 1 usage/config error, 2 numeric or integration
// failure, 3 resource limit.

#include <CLI11.hpp>
#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "spinsurf/spinsurf.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spinsurf: spin-1/2 cluster dynamics, energy-surface "
               "separability scans, and quantum-jump ensembles"};
  std::string config_path;
  std::string out_dir = "out";
  std::string command;
  std::uint64_t seed = 0;
  bool seed_given = false;

  app.add_option("--config", config_path, "configuration file (key = value)");
  app.add_option("--out", out_dir, "output directory")->capture_default_str();
  app.add_option("--command", command,
                 "experiment to run: evolve|separability|jumps|oracle");
  app.add_option("--seed", seed, "RNG seed (overrides the config file)")
      ->each([&](const std::string&) { seed_given = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    spinsurf::RunConfig cfg = config_path.empty()
                                  ? spinsurf::RunConfig{}
                                  : spinsurf::RunConfig::parse_file(config_path);
    if (seed_given) cfg.seed = seed;
    const std::string chosen = !command.empty() ? command : cfg.command;
    if (chosen.empty())
      throw spinsurf::ConfigError(
          "no command given (use --command or a 'command' config key)");
    spinsurf::run_command(chosen, cfg, out_dir);
    return 0;
  } catch (const spinsurf::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const spinsurf::ResourceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const spinsurf::IntegrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const spinsurf::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
