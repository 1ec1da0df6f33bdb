#pragma once

namespace cograph {

// Entry point of the `cograph` binary: parses the subcommand, runs the
// matching pipeline stage and returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace cograph
