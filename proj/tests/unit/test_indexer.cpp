#include <doctest.h>

#include <algorithm>
#include <random>

#include "sorryforge/indexer.hpp"
#include "support.hpp"

using namespace sorryforge;
namespace fs = std::filesystem;

namespace {

const char* kToolchain = "leanprover/lean4:v4.24.0\n";

// Answers by file path; proof state 1 (a `Nat`-valued hole) fails the Prop probe.
json indexer_rules() {
  return json::parse(R"({"rules": [
    {"expect_substring": "\"path\":\"A.lean\"",
     "response": {"env": 0, "sorries": [{"pos": {"line": 1, "column": 23}, "endPos": {"line": 1, "column": 28},
                                          "goal": "⊢ True", "proofState": 0}]}},
    {"expect_substring": "\"path\":\"B.lean\"",
     "response": {"env": 0, "sorries": [{"pos": {"line": 1, "column": 15}, "endPos": {"line": 1, "column": 20},
                                          "goal": "⊢ ℕ", "proofState": 1}]}},
    {"expect_substring": "\"path\":\"C.lean\"",
     "response": {"env": 0, "sorries": [{"pos": {"line": 2, "column": 2}, "endPos": {"line": 2, "column": 7},
                                          "goal": "⊢ 1 = 1", "proofState": 2}]}},
    {"expect_substring": "\"path\":\"E.lean\"",
     "response": {"env": 0, "messages": [{"severity": "error", "pos": {"line": 1, "column": 0},
                                           "data": "unknown identifier 'oops'"}]}},
    {"expect_substring": "\"proofState\":1,",
     "response": {"proofState": 3, "goals": [],
                  "messages": [{"severity": "error", "pos": {"line": 0, "column": 0}, "data": "type mismatch"}]}},
    {"expect_substring": "", "response": {"proofState": 4, "goals": ["⊢ True"]}}
  ]})");
}

struct IndexFixture {
  testing::TempDir tmp;
  testing::GitRepo repo{tmp / "origin"};
  std::string main_commit, feature_commit;

  IndexFixture() {
    main_commit = repo.commit({{"lean-toolchain", kToolchain},
                               {"A.lean", "theorem t : True := by sorry\n"},
                               {"B.lean", "def d : Nat := sorry\n"},
                               {"README.md", "sorry in prose does not count\n"}},
                              "main", "2025-03-01T12:00:00Z", "Alice@Example.org");
    repo.checkout("feature", true);
    feature_commit = repo.commit({{"C.lean", "theorem c : 1 = 1 := by\n  sorry\n"},
                                  {"E.lean", "theorem e : True := oops sorry\n"}},
                                 "feature", "2025-04-01T12:00:00Z", "Bob@Example.org");
    repo.checkout("main");
    repo.checkout("zbroken", true);
    repo.commit({{"broken", "1"}}, "broken build", "2025-04-02T12:00:00Z");
    repo.checkout("main");
    testing::write_json(tmp / "rules.json", indexer_rules());
  }

  IndexOptions options() const {
    IndexOptions o;
    o.cache_dir = tmp / "cache";
    o.build.command = {"sh", "-c", "test ! -f broken"};
    o.build.timeout = std::chrono::seconds(30);
    o.backend = MockBackend{tmp / "rules.json"};
    o.repl_timeout = std::chrono::seconds(5);
    o.inclusion_date = *UtcTime::parse("2025-06-01T00:00:00Z");
    return o;
  }

  RepoListing listing() const {
    RepoListing l;
    l.name = "origin";
    l.remote = repo.remote();
    l.license_id = "MIT";
    l.is_public = true;
    return l;
  }
};

SorryRecord rec(const std::string& remote, const std::string& goal, const std::string& blame,
                const std::string& inclusion, int line) {
  return testing::make_record(remote, goal, line, 23, blame, inclusion);
}

}  // namespace

TEST_CASE("leaf commits and blame over a real repository") {
  IndexFixture f;
  Workspace ws = prepare_workspace({f.repo.remote(), "main", f.main_commit, ""}, f.tmp / "cache");
  auto leaves = enumerate_leaf_commits(ws);
  REQUIRE(leaves.size() == 3);
  CHECK(leaves[0].branch == "feature");
  CHECK(leaves[0].commit == f.feature_commit);
  CHECK(leaves[1].branch == "main");
  CHECK(leaves[1].commit == f.main_commit);
  CHECK(leaves[2].branch == "zbroken");
  CHECK(leaves[0].committed_at == *UtcTime::parse("2025-04-01T12:00:00Z"));
}

TEST_CASE("blame distinguishes lines from different commits") {
  testing::TempDir tmp;
  testing::GitRepo repo(tmp / "r");
  repo.commit({{"lean-toolchain", kToolchain}, {"A.lean", "line one\n"}}, "one", "2025-01-10T00:00:00Z",
              "first@example.org");
  std::string second = repo.commit({{"A.lean", "line one\nline two\n"}}, "two", "2025-02-20T08:30:00Z",
                                   "Second@Example.org");
  Workspace ws = prepare_workspace({repo.remote(), "main", second, ""}, tmp / "cache");

  SourceLocation l1{"A.lean", 1, 0, 1, 4}, l2{"A.lean", 2, 0, 2, 4};
  BlameInfo b1 = blame_metadata(ws, l1);
  BlameInfo b2 = blame_metadata(ws, l2);
  CHECK(b1.blame_email_hash == hash_email("first@example.org"));
  CHECK(b1.blame_date == *UtcTime::parse("2025-01-10T00:00:00Z"));
  CHECK(b2.blame_email_hash == hash_email("second@example.org"));
  CHECK(b2.blame_date == *UtcTime::parse("2025-02-20T08:30:00Z"));

  SourceLocation missing{"Nope.lean", 1, 0, 1, 1};
  CHECK_THROWS_AS(blame_metadata(ws, missing), Error);
}

TEST_CASE("goal extraction against a mock REPL") {
  IndexFixture f;
  Workspace ws;
  ws.root = f.repo.dir;
  ws.build_state.status = BuildStatus::Built;
  auto session = open_session(ws, MockBackend{f.tmp / "rules.json"});

  ScanHit a{{"A.lean", 1, 23, 1, 28}, "sorry"};
  GoalState g = extract_goal(*session, a, "A.lean");
  CHECK(g.pretty == "⊢ True");
  CHECK(g.is_prop);

  ScanHit b{{"B.lean", 1, 15, 1, 20}, "sorry"};
  CHECK_FALSE(extract_goal(*session, b, "B.lean").is_prop);

  ScanHit shifted{{"A.lean", 1, 22, 1, 27}, "sorry"};
  try {
    extract_goal(*session, shifted, "A.lean");
    FAIL("expected NoMatchingSorry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoMatchingSorry);
  }

  try {
    elaborate_file(*session, "E.lean");
    FAIL("expected ElaborationFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ElaborationFailed);
  }
}

TEST_CASE("index_repository over two indexable branches") {
  IndexFixture f;
  RepoIndexResult r = index_repository(f.listing(), f.options());
  CHECK_FALSE(r.error);

  IndexStats want;
  want.build_failure = 1;      // zbroken
  want.elaboration_failure = 1;  // E.lean
  want.non_prop = 2;           // B.lean on main and feature
  want.duplicate = 1;          // A.lean on both branches
  CHECK(r.stats == want);

  REQUIRE(r.records.size() == 2);
  const SorryRecord& c = r.records[0];  // newest blame first
  const SorryRecord& a = r.records[1];
  CHECK(c.debug_info.goal == "⊢ 1 = 1");
  CHECK(c.repo.branch == "feature");
  CHECK(c.repo.commit == f.feature_commit);
  CHECK(c.location == SourceLocation{"C.lean", 2, 2, 2, 7});
  CHECK(c.metadata.blame_email_hash == hash_email("bob@example.org"));
  CHECK(c.metadata.blame_date == *UtcTime::parse("2025-04-01T12:00:00Z"));
  CHECK(c.debug_info.url == f.repo.remote() + "/blob/" + f.feature_commit + "/C.lean#L2");

  CHECK(a.debug_info.goal == "⊢ True");
  CHECK(a.repo.lean_version == "v4.24.0");
  CHECK(a.metadata.blame_email_hash == hash_email("alice@example.org"));
  CHECK(a.metadata.inclusion_date == *UtcTime::parse("2025-06-01T00:00:00Z"));
  for (const auto& rec : r.records) CHECK(validate_record(rec).empty());

  // Re-indexing reuses the cache and is deterministic.
  RepoIndexResult again = index_repository(f.listing(), f.options());
  CHECK(again.records == r.records);
  CHECK(again.stats == r.stats);
}

TEST_CASE("index_batch isolates failing repositories") {
  IndexFixture f;
  RepoListing dead;
  dead.name = "tutorial-gone";
  dead.remote = "file://" + (f.tmp / "missing").string();
  RepoListing tagged = f.listing();
  tagged.category = RepoCategory::Library;

  BatchResult b = index_batch({dead, tagged}, f.options(), default_category_rules(), 2);
  REQUIRE(b.repos.size() == 2);
  CHECK(b.repos[0].error);
  CHECK_FALSE(b.repos[1].error);
  CHECK(b.records.size() == 2);
  CHECK(b.stats.non_prop == 2);
  CHECK(b.categories.at(dead.remote) == RepoCategory::Pedagogical);
  CHECK(b.categories.at(tagged.remote) == RepoCategory::Library);
}

TEST_CASE("deduplicate keeps the newest blame per remote and goal") {
  auto older = rec("r1", "⊢ True", "2025-01-01T00:00:00Z", "2025-07-01T00:00:00Z", 1);
  auto newer = rec("r1", "⊢  True\n", "2025-02-01T00:00:00Z", "2025-07-01T00:00:00Z", 2);
  auto other_repo = rec("r2", "⊢ True", "2024-01-01T00:00:00Z", "2025-07-01T00:00:00Z", 1);
  auto distinct = rec("r1", "⊢ False", "2025-03-01T00:00:00Z", "2025-07-01T00:00:00Z", 3);

  auto out = deduplicate({older, newer, other_repo, distinct});
  REQUIRE(out.size() == 3);
  CHECK(out[0] == distinct);
  CHECK(out[1] == newer);
  CHECK(out[2] == other_repo);

  // Tie on blame: the later inclusion wins; full tie: the smaller id.
  auto inc_a = rec("r3", "⊢ P", "2025-01-01T00:00:00Z", "2025-05-01T00:00:00Z", 1);
  auto inc_b = rec("r3", "⊢ P", "2025-01-01T00:00:00Z", "2025-06-01T00:00:00Z", 2);
  CHECK(deduplicate({inc_a, inc_b}) == std::vector<SorryRecord>{inc_b});
  auto tie_a = rec("r4", "⊢ Q", "2025-01-01T00:00:00Z", "2025-05-01T00:00:00Z", 1);
  auto tie_b = rec("r4", "⊢ Q", "2025-01-01T00:00:00Z", "2025-05-01T00:00:00Z", 2);
  auto smaller = std::min(tie_a, tie_b, [](const auto& x, const auto& y) { return x.id < y.id; });
  CHECK(deduplicate({tie_a, tie_b}) == std::vector<SorryRecord>{smaller});
}

TEST_CASE("deduplicate is order independent and idempotent") {
  std::mt19937 rng(99);
  const std::vector<std::string> goals = {"⊢ A", "⊢ B", "⊢  A", "⊢ C\n"};
  std::vector<SorryRecord> records;
  for (int i = 0; i < 60; ++i) {
    std::string day = std::to_string(10 + static_cast<int>(rng() % 18));
    records.push_back(rec("r" + std::to_string(rng() % 3), goals[rng() % goals.size()],
                          "2025-01-" + day + "T00:00:00Z", "2025-07-01T00:00:00Z", i + 1));
  }
  auto once = deduplicate(records);
  CHECK(deduplicate(once) == once);
  std::shuffle(records.begin(), records.end(), rng);
  CHECK(deduplicate(records) == once);
  CHECK(once.size() == 9);  // 3 remotes x 3 distinct normalized goals
}
