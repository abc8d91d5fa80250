#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace herding::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the herding command line tool. Subcommands: run, bench-t,
// gas-check. Output lines on `out` are `key: value` pairs.
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses a comma separated list of sample times ("0.01,0.1,0.5").
std::vector<double> parse_t_values(const std::string& list);

}  // namespace herding::cli
