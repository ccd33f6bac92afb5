#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace peace {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitBackend = 3;

/// Entry point of the `peace` tool. args[0] is the program name. Never
/// throws; maps library errors onto the exit-code contract.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace peace
