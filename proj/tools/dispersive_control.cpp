#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dctl/dctl.h"

int main(int argc, char** argv) {
  CLI::App app{"Control experiments for coupled KdV systems on the torus", "dispersive-control"};
  std::string command, config_path, out_dir = "out";
  std::uint64_t seed = 0;
  const std::vector<std::string> commands{"spectrum",          "control-linear", "stabilize",
                                          "control-nonlinear", "global-steer",   "resonance"};
  app.add_option("command", command, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(commands));
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--out", out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", seed, "Seed override for random data");
  app.set_version_flag("--version", std::string(dctl_version()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  std::ifstream in(config_path, std::ios::binary);
  if (!in) {
    std::cerr << "ConfigError: cannot read " << config_path << "\n";
    return 2;
  }
  std::stringstream ss;
  ss << in.rdbuf();

  std::vector<char> msg(4096, '\0');
  const int rc = dctl_run_command(command.c_str(), ss.str().c_str(), out_dir.c_str(), seed,
                                  seed_opt->count() > 0 ? 1 : 0, msg.data(), msg.size());
  if (rc != 0)
    std::cerr << msg.data() << "\n";
  else
    std::cout << command << ": wrote " << out_dir << "\n";
  return rc;
}
