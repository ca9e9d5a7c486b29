#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace uwiq {

// Exit codes: 0 success, 1 usage error, 2 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs one CLI invocation (args excludes the program name). The binary in
// tools/ is a thin wrapper; tests drive this in-process.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace uwiq
