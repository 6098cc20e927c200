#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sorryforge/core_model.hpp"
#include "sorryforge/errors.hpp"

namespace sorryforge {

// Workspaces ------------------------------------------------------------------

enum class BuildStatus { Unbuilt, Built, Failed };

struct BuildState {
  BuildStatus status = BuildStatus::Unbuilt;
  std::vector<std::string> messages;  // captured output when Failed
};

struct Workspace {
  std::filesystem::path root;
  RepoCoordinates coords;
  std::string toolchain;
  BuildState build_state;
};

inline constexpr const char* kCacheDirEnv = "SORRYFORGE_CACHE_DIR";

/// SORRYFORGE_CACHE_DIR when set, otherwise `fallback`.
std::filesystem::path resolve_cache_dir(const std::filesystem::path& fallback);

/// Cache layout: <cache_dir>/<sha256(remote)>/<commit>/ holds the checkout and
/// <cache_dir>/<sha256(remote)>/<commit>.json its metadata. Clone and checkout
/// only happen on a miss; population is serialized per key with a file lock.
/// Throws Error(CloneFailed | CheckoutFailed | ToolchainMissing).
Workspace prepare_workspace(const RepoCoordinates& coords, const std::filesystem::path& cache_dir);

/// "leanprover/lean4:v4.24.0" -> "v4.24.0".
std::string parse_toolchain(std::string_view file_text);

struct BuildOptions {
  std::vector<std::string> command{"lake", "build"};
  std::chrono::seconds timeout{3600};
};

/// Runs the build command in the workspace root unless already Built.
/// Throws Error(BuildTimeout).
Workspace build_workspace(Workspace workspace, const BuildOptions& options = {});

/// Commit the remote's HEAD points at (git ls-remote). Throws Error(GitQueryFailed).
std::string resolve_remote_head(const std::string& remote);

// REPL wire protocol ----------------------------------------------------------

struct ReplPosition {
  int line = 1;
  int column = 0;

  bool operator==(const ReplPosition&) const = default;
};

enum class Severity { Info, Warning, Error };

struct ReplMessage {
  Severity severity = Severity::Info;
  ReplPosition pos;
  std::optional<ReplPosition> end_pos;
  std::string data;
};

struct ReplSorry {
  ReplPosition pos;
  std::optional<ReplPosition> end_pos;
  std::string goal;
  int proof_state = 0;
};

struct ReplResponse {
  std::optional<int> env;
  std::vector<ReplMessage> messages;
  std::vector<ReplSorry> sorries;
  // Tactic-mode answers only.
  std::optional<int> proof_state;
  std::vector<std::string> goals;

  bool has_errors() const;
  std::vector<std::string> error_messages() const;
};

struct CommandRequest {
  std::string cmd;
  std::optional<int> env;
};

struct FileRequest {
  std::string path;  // relative to the workspace root
  std::optional<int> env;
};

// Runs a tactic against a proof state reported in `sorries`.
struct TacticRequest {
  std::string tactic;
  int proof_state = 0;
};

using ReplRequest = std::variant<CommandRequest, FileRequest, TacticRequest>;

/// Single-line JSON frame: {"cmd"|"path", "env"?} or {"tactic", "proofState"}.
std::string encode_request(const ReplRequest& request);

/// Throws Error(ProtocolError) if the frame is not a REPL response object.
ReplResponse parse_response(const json& frame);
ReplResponse parse_response_text(std::string_view frame);

// Sessions --------------------------------------------------------------------

struct RealBackend {
  std::vector<std::string> command;  // empty: default_repl_command()
};

struct MockBackend {
  std::filesystem::path script;
};

using Backend = std::variant<RealBackend, MockBackend>;

/// SORRYFORGE_REPL_CMD (whitespace separated) or `lake env repl`.
std::vector<std::string> default_repl_command();

inline constexpr std::chrono::seconds kDefaultReplTimeout{300};

// One session owns one REPL child (Real) or one script cursor (Mock) and
// answers requests strictly one at a time.
class ReplSession {
 public:
  explicit ReplSession(Workspace workspace) : workspace_(std::move(workspace)) {}
  virtual ~ReplSession() = default;
  ReplSession(const ReplSession&) = delete;
  ReplSession& operator=(const ReplSession&) = delete;

  /// Throws Error(Timeout | ProtocolError | SessionDead | ScriptExhausted).
  ReplResponse check_file(const ReplRequest& request,
                          std::chrono::seconds timeout = kDefaultReplTimeout);
  /// Idempotent.
  void close();
  bool is_open() const { return open_; }
  const Workspace& workspace() const { return workspace_; }
  int requests_served() const { return served_; }

 protected:
  virtual ReplResponse exchange(const ReplRequest& request, std::chrono::seconds timeout) = 0;
  virtual void shutdown() {}

 private:
  Workspace workspace_;
  std::mutex in_flight_;
  bool open_ = true;
  int served_ = 0;
};

/// Throws Error(SpawnFailed) for Real, Error(IoError | ProtocolError) for an
/// unreadable Mock script.
std::unique_ptr<ReplSession> open_session(const Workspace& workspace, const Backend& backend);

// Mock scripts ----------------------------------------------------------------

struct MockEntry {
  std::string expect_substring;
  json response;         // object, or a string sent as the raw frame
  bool stall = false;    // simulate a request that never answers
};

// A JSON list is consumed in order (ScriptExhausted afterwards). An object
// {"rules": [...]} answers every request with the first matching entry and
// never runs out. Entries are matched against the request frame followed by
// the text of the requested file, if any.
struct MockScript {
  enum class Mode { Sequential, Rules };
  Mode mode = Mode::Sequential;
  std::vector<MockEntry> entries;
};

MockScript parse_mock_script(const json& document);
MockScript load_mock_script(const std::filesystem::path& path);

}  // namespace sorryforge
