// Command-line front end. Exit codes: 0 success, 1 the computation failed or
// a check did not pass, 2 bad usage or input.

#ifndef VORB_CLI_HPP
#define VORB_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace vorb {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vorb

#endif  // VORB_CLI_HPP
