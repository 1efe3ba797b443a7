#pragma once

#include <iosfwd>

namespace nouk {

/// Entry point of the `nouk` executable. Exit codes: 0 success, 2 config or
/// validation error, 3 numerical failure, 4 failed invariant suite.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace nouk
