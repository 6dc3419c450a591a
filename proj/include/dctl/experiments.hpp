#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dctl/config.hpp"
#include "dctl/error.hpp"

namespace dctl {

enum class Command { Spectrum, ControlLinear, Stabilize, ControlNonlinear, GlobalSteer, Resonance };

std::optional<Command> parse_command(const std::string& name);
const char* command_name(Command c);

enum ExitCode : int {
  ExitOk = 0,
  ExitFailure = 1,
  ExitConfig = 2,
  ExitConditioning = 3,
  ExitBlowUp = 4,
  ExitNoContraction = 5,
};

int exit_code_for(ErrorCode c);

struct CommandOutcome {
  int exit_code = ExitOk;
  std::string message;
  std::string phase;               // global-steer only
  std::vector<std::string> files;  // relative to the output directory
};

// Runs one command and writes its CSV files, manifest.json and, on failure, error.json.
CommandOutcome run_command(Command cmd, const RunConfig& cfg, const std::string& out_dir);

// Parses the config text first; schema errors give exit code 2.
CommandOutcome run_command(const std::string& cmd, const std::string& config_text,
                           const std::string& out_dir,
                           std::optional<std::uint64_t> seed = std::nullopt);

// RFC 4180 helpers.
std::string csv_escape(const std::string& field);
std::string csv_number(double x);
std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<std::string>>& rows);

}  // namespace dctl
