#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sramm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one subcommand. `args` excludes the program name, e.g. {"gen", "--n", "64", ...}.
/// Returns 0 on success, 1 when the command's pass predicate fails, 2 on usage or I/O errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sramm::cli
