#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ndf/problem_io.hpp"

namespace ndf {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitNonConvergence = 4,
  kExitInconclusive = 5,
};

struct CommandFlags {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<double> alpha0;
  std::optional<std::size_t> schedule_depth;
  std::optional<double> divergence_threshold;
  std::optional<std::size_t> terms;
  std::optional<std::size_t> max_iterations;
  std::optional<std::string> csv;
  /// Field argument: a single number (constant field) or "id=value,..."
  /// with unlisted points set to 0.
  std::optional<std::string> field;
  /// Point set argument: "id,id,...".
  std::optional<std::string> set;
  double alpha = 1.0;
  double r = 1.0;
  double p = 2.0;
  std::string kind = "hardy";
  std::string r_grid = "0.05,0.1,0.25,0.5,1,2";
  bool timing = false;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string envelope;  ///< JSON text for stdout (empty on error)
  std::string csv;       ///< per-point tables, when any
  std::string error;     ///< message for stderr
};

const std::vector<std::string>& command_names();

/// Runs one subcommand. Library errors are mapped to exit codes, never
/// thrown. `input_bytes` is the raw problem text, used for the digest.
CommandResult run_command(const std::string& name, const ProblemFile& problem, const std::string& input_bytes,
                          const CommandFlags& flags);

/// Exit code for an exception escaping a command.
int exit_code_for(const std::exception& e);

Field parse_field_arg(const MeasureSpace& space, const std::string& text);
PointSet parse_set_arg(const MeasureSpace& space, const std::string& text);

}  // namespace ndf
