#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qtester::cli {

/// Exit codes: 0 success, 1 negative verdict (incompatible / invalid object),
/// 2 usage or input error, 3 numerical failure.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitNegative = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qtester::cli
