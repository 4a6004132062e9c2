#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coja::cli {

/// Exit codes: 0 success, 2 usage or configuration error, 3 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Environment variable naming the directory for default output files.
inline constexpr const char* kOutputDirEnv = "COJA_OUTPUT_DIR";

/// Runs the `coja` command line. `args` excludes the program name. Scalar
/// results go to `out` as JSON; diagnostics and timing go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coja::cli
