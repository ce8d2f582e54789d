#pragma once

namespace wex {

// Command-line entry point; returns the process exit code:
//   0 all requested certificates pass, 1 some certificate failed,
//   2 usage or input errors.
int run_cli(int argc, const char* const* argv);

}  // namespace wex
