// Command-line front-end entry point (wired to main in the tool target).
#pragma once

namespace wsntpc {

// Parses arguments, runs one of the feasibility/solve/simulate/sweep
// workflows, and returns the process exit code: 0 on success, 2 on
// usage/config errors, 3 on domain errors (e.g. infeasibility).
int run_cli(int argc, const char* const* argv);

}  // namespace wsntpc
