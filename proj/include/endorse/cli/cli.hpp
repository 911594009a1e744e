#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace endorse::cli {

enum ExitCode : int { kSuccess = 0, kVerificationFailed = 1, kConfigError = 2 };

/// Entry point behind the `endorse` binary. args excludes the program name.
/// Results go to `out` (or to files under --out), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace endorse::cli
