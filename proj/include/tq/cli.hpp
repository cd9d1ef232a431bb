#pragma once

#include <iosfwd>
#include <map>
#include <string>

namespace tq {

/// Reproducibility record printed with every result.
struct RunManifest {
    std::string command;
    std::string model_path;
    std::map<std::string, std::string> parameters;  // effective flag values
    std::string format = "csv";
    std::string seed;
    std::map<std::string, std::string> tolerances;
};

enum ExitCode : int { kExitOk = 0, kExitFail = 1, kExitInput = 2, kExitNumerical = 3 };

/// Entry point of the `tq` tool. Results go to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace tq
