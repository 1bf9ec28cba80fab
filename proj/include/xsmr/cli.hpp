#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xsmr {

inline constexpr int kExitOk = 0;
inline constexpr int kExitViolation = 1;
inline constexpr int kExitConfig = 2;

// Entry point behind the `xsmr` binary; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xsmr
