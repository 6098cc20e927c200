#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sorryforge {

/// Runs one subcommand. Data goes to `out` (or files), diagnostics to `err`.
/// Exit codes: 0 success, 1 operational error or rejected proposal, 2 usage.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace sorryforge
