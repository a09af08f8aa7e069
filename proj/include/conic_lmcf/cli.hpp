#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace conic_lmcf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitInvalid = 2;

/// Runs one subcommand. args excludes the program name. Artifacts go to
/// --out (default "out"); a short summary goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string usage();

}  // namespace conic_lmcf::cli
