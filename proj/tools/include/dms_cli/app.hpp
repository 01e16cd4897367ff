#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace dms::cli {

enum ExitCode : int {
  kSuccess = 0,
  kNumericFailure = 1,  ///< a check failed, a solver gave up, or an output failed its schema
  kUsageError = 2,      ///< bad flags, unreadable or invalid config, missing inputs
};

/// Output directory used when --out is absent (the default is dms_out/<command>).
inline constexpr const char* kOutputDirEnv = "DMS_OUTPUT_DIR";

const char* tool_version();

/// Runs one subcommand. `args` excludes the program name, e.g.
/// {"solve", "model.cfg", "--out", "runs/a"}. Every run that gets as far as
/// its output directory leaves a manifest.json there; `dms replay` reruns it.
int run_command(const std::vector<std::string>& args, std::ostream& out = std::cout,
                std::ostream& err = std::cerr);

}  // namespace dms::cli
