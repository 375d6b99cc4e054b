#pragma once

namespace geodepth {

/// Parses argv and runs the selected subcommand. Returns the process
/// exit status: 0 on success, 1 on usage or input errors, 2 on internal
/// failures.
int run_cli(int argc, const char* const* argv);

}  // namespace geodepth
