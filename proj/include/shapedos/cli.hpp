#pragma once

#include <iosfwd>

namespace shapedos {

/// Entry point of the `shapedos` executable. Returns the process exit code:
/// 0 success, 2 config error, 3 numerical failure, 4 precondition rejection.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace shapedos
