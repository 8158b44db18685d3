#pragma once

#include <ostream>

namespace topicrel {

// Exit codes: 0 success, 1 validation error, 2 runtime error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `topicrel` command line tool. Each stage prints one
// JSON summary line to `out`; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace topicrel
