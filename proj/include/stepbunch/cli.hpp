#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stepbunch::cli {

enum ExitCode : int {
  kOk = 0,
  kValidation = 2,
  kNumerical = 3,
  kUsage = 64,
};

// Runs one subcommand. args excludes the program name. The one-line JSON
// summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t h);

}  // namespace stepbunch::cli
