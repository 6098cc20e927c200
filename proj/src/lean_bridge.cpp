#include "sorryforge/lean_bridge.hpp"

#include <cstdlib>
#include <sstream>

#include "git.hpp"
#include "sorryforge/fs_util.hpp"
#include "sorryforge/hashing.hpp"
#include "sorryforge/subprocess.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

// Workspaces ------------------------------------------------------------------

fs::path resolve_cache_dir(const fs::path& fallback) {
  if (const char* env = std::getenv(kCacheDirEnv); env && *env) return fs::path(env);
  return fallback;
}

std::string parse_toolchain(std::string_view text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  auto last = text.find_first_of("\r\n", first);
  std::string_view line = text.substr(first, last == std::string_view::npos ? text.npos : last - first);
  while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
  if (auto colon = line.rfind(':'); colon != std::string_view::npos) line.remove_prefix(colon + 1);
  return std::string(line);
}

namespace {

std::string_view to_string(BuildStatus s) {
  switch (s) {
    case BuildStatus::Unbuilt: return "Unbuilt";
    case BuildStatus::Built: return "Built";
    case BuildStatus::Failed: return "Failed";
  }
  return "Unbuilt";
}

BuildStatus parse_build_status(std::string_view s) {
  if (s == "Built") return BuildStatus::Built;
  if (s == "Failed") return BuildStatus::Failed;
  return BuildStatus::Unbuilt;
}

struct CachePaths {
  fs::path key_dir;
  fs::path checkout;
  fs::path metadata;
  fs::path lock;
};

CachePaths cache_paths(const RepoCoordinates& coords, const fs::path& cache_dir) {
  CachePaths p;
  p.key_dir = cache_dir / sha256_hex(coords.remote);
  p.checkout = p.key_dir / coords.commit;
  p.metadata = p.key_dir / (coords.commit + ".json");
  p.lock = p.key_dir / (coords.commit + ".lock");
  return p;
}

void save_metadata(const Workspace& ws, const fs::path& path) {
  json j = {{"remote", ws.coords.remote},
            {"commit", ws.coords.commit},
            {"toolchain", ws.toolchain},
            {"build_state", std::string(to_string(ws.build_state.status))},
            {"build_messages", ws.build_state.messages}};
  write_file_atomic(path, j.dump(2) + "\n");
}

std::optional<Workspace> load_cached(const RepoCoordinates& coords, const CachePaths& p) {
  std::error_code ec;
  if (!fs::is_directory(p.checkout, ec) || !fs::exists(p.metadata, ec)) return std::nullopt;
  json j = json::parse(read_file(p.metadata), nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  Workspace ws;
  ws.root = p.checkout;
  ws.coords = coords;
  ws.toolchain = j.value("toolchain", std::string());
  ws.coords.lean_version = ws.toolchain;
  ws.build_state.status = parse_build_status(j.value("build_state", std::string()));
  ws.build_state.messages = j.value("build_messages", std::vector<std::string>{});
  return ws;
}

}  // namespace

Workspace prepare_workspace(const RepoCoordinates& coords, const fs::path& cache_dir) {
  const CachePaths p = cache_paths(coords, cache_dir);
  if (auto hit = load_cached(coords, p)) return *hit;

  fs::create_directories(p.key_dir);
  FileLock lock(p.lock);
  if (auto hit = load_cached(coords, p)) return *hit;

  fs::path staging = p.key_dir / (coords.commit + ".staging-" + unique_suffix());
  struct Cleanup {
    fs::path dir;
    ~Cleanup() {
      std::error_code ec;
      if (!dir.empty()) fs::remove_all(dir, ec);
    }
  } cleanup{staging};

  git::run({"clone", "--quiet", "--no-checkout", coords.remote, staging.string()}, p.key_dir,
           ErrorCode::CloneFailed);
  git::run({"checkout", "--quiet", "--detach", coords.commit}, staging, ErrorCode::CheckoutFailed);
  std::string head = git::run({"rev-parse", "HEAD"}, staging, ErrorCode::CheckoutFailed);
  if (head.rfind(coords.commit, 0) != 0) {
    throw Error(ErrorCode::CheckoutFailed, "HEAD " + head + " does not match " + coords.commit);
  }

  fs::path toolchain_file = staging / "lean-toolchain";
  if (!fs::exists(toolchain_file)) {
    throw Error(ErrorCode::ToolchainMissing, "no lean-toolchain file in " + coords.remote + "@" + coords.commit);
  }
  Workspace ws;
  ws.coords = coords;
  ws.toolchain = parse_toolchain(read_file(toolchain_file));
  if (ws.toolchain.empty()) throw Error(ErrorCode::ToolchainMissing, "empty lean-toolchain file");
  ws.coords.lean_version = ws.toolchain;

  std::error_code ec;
  fs::remove_all(p.checkout, ec);
  fs::rename(staging, p.checkout);
  cleanup.dir.clear();
  ws.root = p.checkout;
  save_metadata(ws, p.metadata);
  return ws;
}

Workspace build_workspace(Workspace ws, const BuildOptions& options) {
  if (ws.build_state.status == BuildStatus::Built) return ws;
  const fs::path key_dir = ws.root.parent_path();
  FileLock lock(key_dir / (ws.coords.commit + ".lock"));
  if (auto cached = load_cached(ws.coords, cache_paths(ws.coords, key_dir.parent_path()));
      cached && cached->root == ws.root && cached->build_state.status == BuildStatus::Built) {
    ws.build_state = cached->build_state;
    return ws;
  }

  ProcessOptions po;
  po.cwd = ws.root;
  po.timeout = options.timeout;
  ProcessResult r = run_process(options.command, po);
  if (r.timed_out) {
    throw Error(ErrorCode::BuildTimeout,
                "build exceeded " + std::to_string(options.timeout.count()) + " s in " + ws.root.string());
  }
  if (r.exit_code == 0) {
    ws.build_state = {BuildStatus::Built, {}};
  } else {
    std::string output = r.out + r.err;
    if (output.empty()) output = "build exited with status " + std::to_string(r.exit_code);
    ws.build_state = {BuildStatus::Failed, {std::move(output)}};
  }
  save_metadata(ws, key_dir / (ws.coords.commit + ".json"));
  return ws;
}

std::string resolve_remote_head(const std::string& remote) {
  std::string out = git::run({"ls-remote", remote, "HEAD"}, fs::current_path(), ErrorCode::GitQueryFailed);
  auto tab = out.find('\t');
  if (tab != 40) throw Error(ErrorCode::GitQueryFailed, "no HEAD for " + remote);
  return out.substr(0, 40);
}

// Wire protocol ---------------------------------------------------------------

bool ReplResponse::has_errors() const {
  for (const auto& m : messages) {
    if (m.severity == Severity::Error) return true;
  }
  return false;
}

std::vector<std::string> ReplResponse::error_messages() const {
  std::vector<std::string> out;
  for (const auto& m : messages) {
    if (m.severity == Severity::Error) out.push_back(m.data);
  }
  return out;
}

std::string encode_request(const ReplRequest& request) {
  json frame = std::visit(
      [](const auto& r) -> json {
        using R = std::decay_t<decltype(r)>;
        json j;
        if constexpr (std::is_same_v<R, CommandRequest>) {
          j["cmd"] = r.cmd;
          if (r.env) j["env"] = *r.env;
        } else if constexpr (std::is_same_v<R, FileRequest>) {
          j["path"] = r.path;
          if (r.env) j["env"] = *r.env;
        } else {
          j["tactic"] = r.tactic;
          j["proofState"] = r.proof_state;
        }
        return j;
      },
      request);
  return frame.dump();
}

namespace {

[[noreturn]] void protocol_error(const std::string& what) { throw Error(ErrorCode::ProtocolError, what); }

ReplPosition parse_pos(const json& j, const char* what) {
  if (!j.is_object() || !j.contains("line") || !j.contains("column") || !j["line"].is_number_integer() ||
      !j["column"].is_number_integer()) {
    protocol_error(std::string("bad position in ") + what);
  }
  return {j["line"].get<int>(), j["column"].get<int>()};
}

std::optional<ReplPosition> parse_optional_pos(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return parse_pos(*it, what);
}

}  // namespace

ReplResponse parse_response(const json& frame) {
  if (!frame.is_object()) protocol_error("response frame is not a JSON object");
  ReplResponse r;

  const bool has_payload = frame.contains("env") || frame.contains("messages") ||
                           frame.contains("sorries") || frame.contains("proofState");
  if (!has_payload) {
    auto it = frame.find("message");
    if (it == frame.end() || !it->is_string()) protocol_error("response has neither env nor message");
    // REPL-level failure, e.g. an unknown environment or a tactic error.
    r.messages.push_back({Severity::Error, {1, 0}, std::nullopt, it->get<std::string>()});
    return r;
  }

  if (auto it = frame.find("env"); it != frame.end() && !it->is_null()) {
    if (!it->is_number_integer()) protocol_error("env is not an integer");
    r.env = it->get<int>();
  }
  if (auto it = frame.find("proofState"); it != frame.end() && !it->is_null()) {
    if (!it->is_number_integer()) protocol_error("proofState is not an integer");
    r.proof_state = it->get<int>();
  }
  if (auto it = frame.find("goals"); it != frame.end() && it->is_array()) {
    for (const auto& g : *it) {
      if (!g.is_string()) protocol_error("goal is not a string");
      r.goals.push_back(g.get<std::string>());
    }
  }
  if (auto it = frame.find("messages"); it != frame.end() && !it->is_null()) {
    if (!it->is_array()) protocol_error("messages is not a list");
    for (const auto& m : *it) {
      if (!m.is_object()) protocol_error("message is not an object");
      ReplMessage msg;
      std::string severity = m.value("severity", std::string("info"));
      if (severity == "error") {
        msg.severity = Severity::Error;
      } else if (severity == "warning") {
        msg.severity = Severity::Warning;
      } else if (severity == "info" || severity == "information") {
        msg.severity = Severity::Info;
      } else {
        protocol_error("unknown severity " + severity);
      }
      msg.pos = m.contains("pos") ? parse_pos(m["pos"], "message") : ReplPosition{};
      msg.end_pos = parse_optional_pos(m, "endPos", "message");
      auto data = m.find("data");
      if (data == m.end() || !data->is_string()) protocol_error("message without data");
      msg.data = data->get<std::string>();
      r.messages.push_back(std::move(msg));
    }
  }
  if (auto it = frame.find("sorries"); it != frame.end() && !it->is_null()) {
    if (!it->is_array()) protocol_error("sorries is not a list");
    for (const auto& s : *it) {
      if (!s.is_object() || !s.contains("pos")) protocol_error("sorry entry without position");
      ReplSorry sorry;
      sorry.pos = parse_pos(s["pos"], "sorry");
      sorry.end_pos = parse_optional_pos(s, "endPos", "sorry");
      auto goal = s.find("goal");
      if (goal == s.end() || !goal->is_string() || goal->get<std::string>().empty()) {
        protocol_error("sorry entry without goal");
      }
      sorry.goal = goal->get<std::string>();
      sorry.proof_state = s.value("proofState", 0);
      r.sorries.push_back(std::move(sorry));
    }
  }
  return r;
}

ReplResponse parse_response_text(std::string_view frame) {
  json j = json::parse(frame, nullptr, false);
  if (j.is_discarded()) protocol_error("unparseable frame: " + std::string(frame.substr(0, 200)));
  return parse_response(j);
}

// Sessions --------------------------------------------------------------------

std::vector<std::string> default_repl_command() {
  if (const char* env = std::getenv("SORRYFORGE_REPL_CMD"); env && *env) {
    std::istringstream in(env);
    std::vector<std::string> argv;
    for (std::string word; in >> word;) argv.push_back(word);
    if (!argv.empty()) return argv;
  }
  return {"lake", "env", "repl"};
}

ReplResponse ReplSession::check_file(const ReplRequest& request, std::chrono::seconds timeout) {
  std::lock_guard guard(in_flight_);
  if (!open_) throw Error(ErrorCode::SessionDead, "session is closed");
  ReplResponse response = exchange(request, timeout);
  ++served_;
  return response;
}

void ReplSession::close() {
  std::lock_guard guard(in_flight_);
  if (!open_) return;
  open_ = false;
  shutdown();
}

namespace {

class RealSession final : public ReplSession {
 public:
  RealSession(const Workspace& ws, const std::vector<std::string>& command)
      : ReplSession(ws) {
    ProcessOptions options;
    options.cwd = ws.root;
    child_.emplace(ChildProcess::spawn(command, options));
  }

 protected:
  ReplResponse exchange(const ReplRequest& request, std::chrono::seconds timeout) override {
    if (!child_ || !child_->running()) throw Error(ErrorCode::SessionDead, "REPL process is gone");
    // The REPL reads one command per blank-line separated block.
    child_->write(encode_request(request) + "\n\n");
    auto deadline = std::chrono::steady_clock::now() + timeout;
    std::string frame;
    for (;;) {
      std::optional<std::string> line = child_->read_line(deadline);
      if (!line) {
        child_->terminate();
        throw Error(ErrorCode::Timeout, "REPL did not answer within " + std::to_string(timeout.count()) + " s");
      }
      if (frame.empty() && line->find_first_not_of(" \t") == std::string::npos) continue;
      if (frame.empty() && line->front() != '{') protocol_error("unexpected REPL output: " + *line);
      if (!frame.empty() && line->empty()) protocol_error("incomplete frame: " + frame.substr(0, 200));
      frame += *line;
      frame += '\n';
      if (json::accept(frame)) return parse_response_text(frame);
      if (frame.size() > (64u << 20)) protocol_error("frame too large");
    }
  }

  void shutdown() override {
    if (child_) child_->terminate();
  }

 private:
  std::optional<ChildProcess> child_;
};

class MockSession final : public ReplSession {
 public:
  MockSession(const Workspace& ws, MockScript script) : ReplSession(ws), script_(std::move(script)) {}

 protected:
  ReplResponse exchange(const ReplRequest& request, std::chrono::seconds) override {
    std::string subject = encode_request(request);
    if (const auto* file = std::get_if<FileRequest>(&request)) {
      std::error_code ec;
      fs::path p = workspace().root / file->path;
      if (fs::exists(p, ec)) subject += "\n" + read_file(p);
    }

    const MockEntry* entry = nullptr;
    if (script_.mode == MockScript::Mode::Sequential) {
      if (cursor_ >= script_.entries.size()) {
        throw Error(ErrorCode::ScriptExhausted,
                    "mock script answered all " + std::to_string(script_.entries.size()) + " requests");
      }
      entry = &script_.entries[cursor_++];
      if (subject.find(entry->expect_substring) == std::string::npos) {
        protocol_error("mock entry " + std::to_string(cursor_ - 1) + " expected \"" +
                       entry->expect_substring + "\" in request " + encode_request(request));
      }
    } else {
      for (const auto& e : script_.entries) {
        if (subject.find(e.expect_substring) != std::string::npos) {
          entry = &e;
          break;
        }
      }
      if (!entry) protocol_error("no mock rule matches request " + encode_request(request));
    }

    if (entry->stall) throw Error(ErrorCode::Timeout, "mock request stalled");
    if (entry->response.is_string()) return parse_response_text(entry->response.get<std::string>());
    return parse_response(entry->response);
  }

 private:
  MockScript script_;
  std::size_t cursor_ = 0;
};

}  // namespace

std::unique_ptr<ReplSession> open_session(const Workspace& workspace, const Backend& backend) {
  if (const auto* mock = std::get_if<MockBackend>(&backend)) {
    return std::make_unique<MockSession>(workspace, load_mock_script(mock->script));
  }
  const auto& real = std::get<RealBackend>(backend);
  if (workspace.build_state.status != BuildStatus::Built) {
    throw Error(ErrorCode::SpawnFailed, "workspace " + workspace.root.string() + " is not built");
  }
  return std::make_unique<RealSession>(workspace, real.command.empty() ? default_repl_command() : real.command);
}

MockScript parse_mock_script(const json& document) {
  MockScript script;
  const json* entries = &document;
  if (document.is_object()) {
    script.mode = MockScript::Mode::Rules;
    auto it = document.find("rules");
    if (it == document.end()) throw Error(ErrorCode::ProtocolError, "mock script object needs \"rules\"");
    entries = &*it;
  }
  if (!entries->is_array()) throw Error(ErrorCode::ProtocolError, "mock script must be a list");
  for (const auto& e : *entries) {
    if (!e.is_object()) throw Error(ErrorCode::ProtocolError, "mock entry is not an object");
    MockEntry entry;
    entry.expect_substring = e.value("expect_substring", std::string());
    entry.stall = e.value("stall", false);
    if (e.contains("response")) {
      entry.response = e["response"];
    } else if (!entry.stall) {
      throw Error(ErrorCode::ProtocolError, "mock entry without response");
    }
    script.entries.push_back(std::move(entry));
  }
  return script;
}

MockScript load_mock_script(const fs::path& path) {
  json document = json::parse(read_file(path), nullptr, false);
  if (document.is_discarded()) throw Error(ErrorCode::ProtocolError, "mock script is not JSON: " + path.string());
  return parse_mock_script(document);
}

}  // namespace sorryforge
