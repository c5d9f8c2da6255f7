#pragma once

#include <iosfwd>

namespace diproperm::cli {

/// Exit statuses: 0 success, 2 invalid input or flags, 3 computational failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitCompute = 3;

/// Runs the command line with argv[0] as program name. `in` feeds the "-" input path.
int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace diproperm::cli
