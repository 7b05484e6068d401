#pragma once

#include <ostream>

namespace levyhk {

enum ExitCode { kExitOk = 0, kExitVerifyFailed = 1, kExitNumeric = 2, kExitUsage = 3 };

// full command line, argv[0] included
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace levyhk
