#pragma once

#include <ostream>

// Command-line front end. Kept in the library so tests can drive it
// in-process with captured streams.
//
// Exit codes: 0 success, 2 invalid flags or scenario, 3 overloaded,
// 4 no convergence, 1 unexpected failure.

namespace powalloc {

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);

}  // namespace powalloc
