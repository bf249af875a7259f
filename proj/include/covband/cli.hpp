#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covband {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Subcommands:
//   run <config> [--out DIR] [--workers N]
//   replicate-paper {i|ii} [--reps R] [--seed S] [--out DIR] [--workers N]
//   schedule --q Q --horizon N
//   bounds --alpha A --c-star C --sigma S [--x0 X] --n N[,N...]
//   margin --family F [family params...] --theta T
// Data goes to files or `out`; diagnostics only to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace covband
