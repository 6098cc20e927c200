#include <doctest.h>

#include <cstdlib>

#include "sorryforge/lean_bridge.hpp"
#include "support.hpp"

using namespace sorryforge;
namespace fs = std::filesystem;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::UsageError;
}

struct RepoFixture {
  testing::TempDir tmp;
  testing::GitRepo repo{tmp / "origin"};
  std::string commit;

  RepoFixture() {
    commit = repo.commit({{"lean-toolchain", "leanprover/lean4:v4.24.0\n"},
                          {"A.lean", "theorem t : True := by sorry\n"}},
                         "init");
  }
  RepoCoordinates coords() const { return {repo.remote(), "main", commit, ""}; }
};

Workspace bare_workspace(const fs::path& root) {
  Workspace ws;
  ws.root = root;
  ws.build_state.status = BuildStatus::Built;
  return ws;
}

}  // namespace

TEST_CASE("toolchain parsing") {
  CHECK(parse_toolchain("leanprover/lean4:v4.24.0\n") == "v4.24.0");
  CHECK(parse_toolchain("leanprover/lean4:v4.23.0-rc2") == "v4.23.0-rc2");
  CHECK(parse_toolchain("v4.27.0-rc1\n# trailing\n") == "v4.27.0-rc1");
}

TEST_CASE("prepare_workspace clones once and reuses the cache") {
  RepoFixture f;
  auto cache = f.tmp / "cache";
  Workspace ws = prepare_workspace(f.coords(), cache);
  CHECK(ws.toolchain == "v4.24.0");
  CHECK(ws.coords.commit == f.commit);
  CHECK(fs::exists(ws.root / "A.lean"));
  CHECK(ws.build_state.status == BuildStatus::Unbuilt);

  // A marker written into the checkout survives the second call: no re-clone.
  testing::write_text(ws.root / "marker", "x");
  Workspace again = prepare_workspace(f.coords(), cache);
  CHECK(again.root == ws.root);
  CHECK(fs::exists(again.root / "marker"));
}

TEST_CASE("prepare_workspace failures") {
  RepoFixture f;
  auto cache = f.tmp / "cache";

  auto bad_commit = f.coords();
  bad_commit.commit = std::string(40, 'f');
  CHECK(code_of([&] { prepare_workspace(bad_commit, cache); }) == ErrorCode::CheckoutFailed);

  RepoCoordinates missing{"file://" + (f.tmp / "nope").string(), "main", f.commit, ""};
  CHECK(code_of([&] { prepare_workspace(missing, cache); }) == ErrorCode::CloneFailed);

  std::string no_toolchain = f.repo.commit({{"lean-toolchain", ""}}, "drop toolchain");
  auto c = f.coords();
  c.commit = no_toolchain;
  CHECK(code_of([&] { prepare_workspace(c, cache); }) == ErrorCode::ToolchainMissing);
}

TEST_CASE("build_workspace records Failed and Built, and is idempotent") {
  RepoFixture f;
  auto cache = f.tmp / "cache";
  Workspace ws = prepare_workspace(f.coords(), cache);

  BuildOptions failing{{"sh", "-c", "echo broken >&2; exit 3"}, std::chrono::seconds(30)};
  Workspace failed = build_workspace(ws, failing);
  CHECK(failed.build_state.status == BuildStatus::Failed);
  REQUIRE_FALSE(failed.build_state.messages.empty());
  CHECK(failed.build_state.messages.front().find("broken") != std::string::npos);

  BuildOptions ok{{"sh", "-c", "echo built >> build.log"}, std::chrono::seconds(30)};
  Workspace built = build_workspace(failed, ok);
  CHECK(built.build_state.status == BuildStatus::Built);

  // Persisted: a fresh prepare sees Built, and a second build does not run.
  Workspace reloaded = prepare_workspace(f.coords(), cache);
  CHECK(reloaded.build_state.status == BuildStatus::Built);
  build_workspace(reloaded, ok);
  CHECK(read_file(ws.root / "build.log") == "built\n");

  BuildOptions slow{{"sleep", "5"}, std::chrono::seconds(1)};
  RepoFixture g;
  Workspace fresh = prepare_workspace(g.coords(), g.tmp / "cache");
  CHECK(code_of([&] { build_workspace(fresh, slow); }) == ErrorCode::BuildTimeout);
}

TEST_CASE("resolve_remote_head") {
  RepoFixture f;
  CHECK(resolve_remote_head(f.repo.remote()) == f.commit);
  CHECK(code_of([&] { resolve_remote_head("file:///definitely/not/here"); }) == ErrorCode::GitQueryFailed);
}

TEST_CASE("request encoding") {
  CHECK(encode_request(CommandRequest{"#print axioms t", 3}) == R"({"cmd":"#print axioms t","env":3})");
  CHECK(encode_request(FileRequest{"A.lean", std::nullopt}) == R"({"path":"A.lean"})");
  CHECK(encode_request(TacticRequest{"rfl", 2}) == R"({"proofState":2,"tactic":"rfl"})");
}

TEST_CASE("response parsing") {
  auto r = parse_response_text(R"({"env":1,"messages":[{"severity":"error","pos":{"line":2,"column":4},
      "endPos":{"line":2,"column":9},"data":"unknown identifier 'x'"},{"severity":"warning",
      "pos":{"line":1,"column":0},"data":"declaration uses 'sorry'"}],
      "sorries":[{"pos":{"line":1,"column":23},"endPos":{"line":1,"column":28},"goal":"⊢ True","proofState":0}]})");
  CHECK(r.env == 1);
  CHECK(r.has_errors());
  CHECK(r.error_messages() == std::vector<std::string>{"unknown identifier 'x'"});
  REQUIRE(r.sorries.size() == 1);
  CHECK(r.sorries[0].goal == "⊢ True");
  CHECK(r.sorries[0].pos == ReplPosition{1, 23});

  auto failure = parse_response_text(R"({"message":"unknown environment."})");
  CHECK(failure.has_errors());

  CHECK(code_of([] { parse_response_text("[1,2]"); }) == ErrorCode::ProtocolError);
  CHECK(code_of([] { parse_response_text("{\"env\":"); }) == ErrorCode::ProtocolError);
  CHECK(code_of([] { parse_response_text(R"({"env":"x"})"); }) == ErrorCode::ProtocolError);
  CHECK(code_of([] { parse_response_text(R"({"sorries":[{"pos":{"line":1,"column":0}}]})"); }) ==
        ErrorCode::ProtocolError);
}

TEST_CASE("mock session: sequential script") {
  testing::TempDir tmp;
  testing::write_json(tmp / "script.json", json::parse(R"([
    {"expect_substring": "A.lean", "response": {"env": 0, "messages": []}},
    {"response": {"env": 1, "messages": []}}
  ])"));
  auto session = open_session(bare_workspace(tmp.path), MockBackend{tmp / "script.json"});
  CHECK(session->check_file(FileRequest{"A.lean", std::nullopt}).env == 0);
  CHECK(session->check_file(CommandRequest{"#eval 1", 0}).env == 1);
  CHECK(session->requests_served() == 2);
  CHECK(code_of([&] { session->check_file(CommandRequest{"#eval 2", 1}); }) == ErrorCode::ScriptExhausted);
  session->close();
  session->close();
  CHECK_FALSE(session->is_open());
  CHECK(code_of([&] { session->check_file(CommandRequest{"x", 0}); }) == ErrorCode::SessionDead);
}

TEST_CASE("mock session: expectation mismatch, malformed frame, stall") {
  testing::TempDir tmp;
  testing::write_json(tmp / "s.json", json::parse(R"([
    {"expect_substring": "B.lean", "response": {"env": 0}},
    {"response": "this is not json"},
    {"stall": true}
  ])"));
  auto session = open_session(bare_workspace(tmp.path), MockBackend{tmp / "s.json"});
  CHECK(code_of([&] { session->check_file(FileRequest{"A.lean", std::nullopt}); }) == ErrorCode::ProtocolError);
  CHECK(code_of([&] { session->check_file(CommandRequest{"x", 0}); }) == ErrorCode::ProtocolError);
  CHECK(code_of([&] { session->check_file(CommandRequest{"y", 0}); }) == ErrorCode::Timeout);
}

TEST_CASE("mock session: rules match file contents") {
  testing::TempDir tmp;
  testing::write_text(tmp / "A.lean", "theorem t : True := by trivial\n");
  testing::write_json(tmp / "rules.json", json::parse(R"({"rules": [
    {"expect_substring": "by trivial", "response": {"env": 7}},
    {"expect_substring": "", "response": {"env": 9}}
  ]})"));
  auto session = open_session(bare_workspace(tmp.path), MockBackend{tmp / "rules.json"});
  for (int i = 0; i < 3; ++i) CHECK(session->check_file(FileRequest{"A.lean", std::nullopt}).env == 7);
  CHECK(session->check_file(CommandRequest{"#check Nat", std::nullopt}).env == 9);
}

TEST_CASE("unreadable mock script") {
  testing::TempDir tmp;
  CHECK(code_of([&] { open_session(bare_workspace(tmp.path), MockBackend{tmp / "missing.json"}); }) ==
        ErrorCode::IoError);
  testing::write_text(tmp / "bad.json", "{not json");
  CHECK(code_of([&] { open_session(bare_workspace(tmp.path), MockBackend{tmp / "bad.json"}); }) ==
        ErrorCode::ProtocolError);
}

TEST_CASE("real session against a stand-in REPL process") {
  testing::TempDir tmp;
  std::vector<std::string> cmd{"python3", (testing::fixtures() / "repl" / "fake_repl.py").string()};

  Workspace unbuilt;
  unbuilt.root = tmp.path;
  CHECK(code_of([&] { open_session(unbuilt, RealBackend{cmd}); }) == ErrorCode::SpawnFailed);

  auto session = open_session(bare_workspace(tmp.path), RealBackend{cmd});
  auto first = session->check_file(FileRequest{"A.lean", std::nullopt}, std::chrono::seconds(20));
  CHECK(first.env == 0);
  REQUIRE(first.sorries.size() == 1);
  CHECK(first.sorries[0].goal == "⊢ True");
  CHECK(session->check_file(CommandRequest{"#eval 1", 0}, std::chrono::seconds(20)).env == 1);
  CHECK(code_of([&] { session->check_file(CommandRequest{"hang", 0}, std::chrono::seconds(1)); }) ==
        ErrorCode::Timeout);
  session->close();
}

TEST_CASE("cache dir override") {
  ::setenv(kCacheDirEnv, "/tmp/override-cache", 1);
  CHECK(resolve_cache_dir(".sorryforge/cache") == fs::path("/tmp/override-cache"));
  ::unsetenv(kCacheDirEnv);
  CHECK(resolve_cache_dir(".sorryforge/cache") == fs::path(".sorryforge/cache"));
}
