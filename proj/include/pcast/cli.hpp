#ifndef PCAST_CLI_HPP
#define PCAST_CLI_HPP

namespace pcast::cli {

// Entry point behind the pcast binary. Exit codes: 0 success, 1 runtime
// failure, 2 usage or config error.
int run_cli(int argc, const char* const* argv);

}  // namespace pcast::cli

#endif
