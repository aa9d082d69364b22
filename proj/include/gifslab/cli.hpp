#pragma once

namespace gifslab {

// Full command-line surface. Returns the process exit code:
// 0 success / all checks pass, 1 verification failure, 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace gifslab
