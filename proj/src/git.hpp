#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sorryforge/errors.hpp"
#include "sorryforge/subprocess.hpp"

namespace sorryforge::git {

// Runs `git <args>` non-interactively; throws Error(code) with stderr on failure.
inline std::string run(const std::vector<std::string>& args, const std::filesystem::path& cwd,
                       ErrorCode code) {
  std::vector<std::string> argv{"git"};
  argv.insert(argv.end(), args.begin(), args.end());
  ProcessOptions options;
  options.cwd = cwd;
  options.env = {{"GIT_TERMINAL_PROMPT", "0"}, {"LC_ALL", "C"}};
  ProcessResult r = run_process(argv, options);
  if (!r.ok()) {
    std::string joined;
    for (const auto& a : args) joined += " " + a;
    throw Error(code, "git" + joined + ": " + (r.err.empty() ? r.out : r.err));
  }
  return r.out;
}

}  // namespace sorryforge::git
