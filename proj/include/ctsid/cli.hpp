#pragma once

namespace ctsid {

// Full command-line front-end (simulate / identify / montecarlo / sweep /
// bode / print-config). Returns the process exit code: 0 success, 2 input
// error, 3 numerical divergence, 4 non-convergence (iteration cap).
int run_cli(int argc, const char* const* argv);

}  // namespace ctsid
