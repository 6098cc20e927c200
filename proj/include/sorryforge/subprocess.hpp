#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sorryforge {

struct ProcessOptions {
  std::filesystem::path cwd;
  std::optional<std::chrono::milliseconds> timeout;
  std::map<std::string, std::string> env;  // added to / overriding the parent environment
};

struct ProcessResult {
  int exit_code = -1;
  std::string out;
  std::string err;
  bool timed_out = false;

  bool ok() const { return !timed_out && exit_code == 0; }
};

/// Runs argv[0] (PATH lookup) to completion, capturing stdout and stderr. On
/// timeout the whole process group is killed. Throws Error(SpawnFailed) if
/// the program cannot be started.
ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options = {});

// A long-lived child with piped stdin/stdout; stderr is discarded. The child
// runs in its own process group and is killed when the handle is destroyed.
class ChildProcess {
 public:
  static ChildProcess spawn(const std::vector<std::string>& argv, const ProcessOptions& options = {});

  ChildProcess(ChildProcess&& other) noexcept;
  ChildProcess& operator=(ChildProcess&& other) noexcept;
  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;
  ~ChildProcess();

  /// Throws Error(SessionDead) if the child has closed its input.
  void write(std::string_view data);

  /// One line without its terminator, or nullopt when the deadline passes.
  /// Throws Error(SessionDead) on end of stream.
  std::optional<std::string> read_line(std::chrono::steady_clock::time_point deadline);

  void terminate();
  bool running() const { return pid_ > 0; }

 private:
  ChildProcess() = default;

  int pid_ = -1;
  int stdin_fd_ = -1;
  int stdout_fd_ = -1;
  std::string buffer_;
};

}  // namespace sorryforge
