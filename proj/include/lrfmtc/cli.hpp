// SPDX-License-Identifier: MIT
#pragma once

#include <iosfwd>

namespace lrfmtc {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitArgument = 2,
    kExitFormat = 3,
    kExitNumerical = 4,
};

/// Entry point of the `lrfmtc` tool. Subcommands: generate, mask, noise,
/// complete, evaluate, sweep. Diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace lrfmtc
