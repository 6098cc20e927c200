#include <doctest.h>

#include <sstream>

#include "sorryforge/cli.hpp"
#include "sorryforge/database.hpp"
#include "sorryforge/provers.hpp"
#include "sorryforge/repo_registry.hpp"
#include "sorryforge/scanner.hpp"
#include "support.hpp"

using namespace sorryforge;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path examples() { return testing::fixtures() / "db" / "examples.json"; }

}  // namespace

TEST_CASE("example database round-trips byte for byte") {
  const std::string original = read_file(examples());
  Database db = load_database(examples());
  REQUIRE(db.snapshot.records.size() == 3);
  for (const auto& r : db.snapshot.records) CHECK(validate_record(r).empty());
  CHECK(validate_snapshot(db.snapshot).empty());
  CHECK(serialize_snapshot(db.snapshot) == original);

  testing::TempDir tmp;
  db.path = tmp / "copy.json";
  save_database(db);
  CHECK(read_file(tmp / "copy.json") == original);
  CHECK(load_database(tmp / "copy.json").snapshot == db.snapshot);

  const auto& flt = db.snapshot.records[2];
  CHECK(flt.repo.lean_version == "v4.27.0-rc1");
  CHECK(flt.location.start_line == 106);
  CHECK(db.snapshot.manifest.categories.at(RepoCategory::Formalization) == 2);
}

TEST_CASE("schema violations name the offending record") {
  json doc = json::parse(read_file(examples()));
  testing::TempDir tmp;

  json missing = doc;
  missing["sorries"][1]["metadata"].erase("inclusion_date");
  testing::write_json(tmp / "a.json", missing);
  try {
    load_database(tmp / "a.json");
    FAIL("expected SchemaViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaViolation);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }

  json tampered = doc;
  tampered["sorries"][0]["location"]["start_column"] = 3;
  testing::write_json(tmp / "b.json", tampered);
  CHECK_THROWS_AS(load_database(tmp / "b.json"), Error);

  testing::write_text(tmp / "c.json", "{\"name\": ");
  CHECK_THROWS_AS(load_database(tmp / "c.json"), Error);
}

TEST_CASE("cli: usage and exit codes") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"select", "--db", examples().string()}).code == 2);           // --n missing
  CHECK(cli({"select", "--db", examples().string(), "--n", "0"}).code == 2);
  CHECK(cli({"report", "--runs", "/nonexistent", "--format", "pdf"}).code == 2);
  auto missing = cli({"dedup", "--db", "/nonexistent/db.json"});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("error:") != std::string::npos);
}

TEST_CASE("cli: select prints a slice") {
  auto r = cli({"select", "--db", examples().string(), "--n", "2"});
  REQUIRE(r.code == 0);
  json slice = json::parse(r.out);
  CHECK(slice["sorries"].size() == 2);
  CHECK(slice["manifest"]["repos"].size() == 2);
}

TEST_CASE("cli: registry ingest and filter") {
  testing::TempDir tmp;
  testing::write_json(tmp / "registry.json", json::parse(R"([
    {"name": "mathlib4", "remote": "https://github.com/leanprover-community/mathlib4", "license": "Apache-2.0",
     "last_update": "2025-12-01", "visibility": "public"},
    {"name": "old", "remote": "https://example.org/old", "license": "MIT",
     "last_update": "2024-12-01", "visibility": "public"},
    {"name": "nolicense", "remote": "https://example.org/x", "visibility": "public"}
  ])"));
  auto ingest = cli({"registry", "ingest", "--input", (tmp / "registry.json").string(), "--out",
                     (tmp / "listings.json").string()});
  REQUIRE(ingest.code == 0);
  CHECK(ingest.err.find("2 listings, 1 dropped") != std::string::npos);

  auto window = cli({"registry", "filter", "--input", (tmp / "listings.json").string(), "--now",
                     "2026-01-01T00:00:00Z"});
  REQUIRE(window.code == 0);
  json kept = json::parse(window.out);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0]["category"] == "Library");

  auto since = cli({"registry", "filter", "--input", (tmp / "listings.json").string(), "--policy",
                    "since:2024-01-01", "--now", "2026-01-01T00:00:00Z"});
  CHECK(json::parse(since.out).size() == 2);
  CHECK(cli({"registry", "filter", "--input", (tmp / "listings.json").string(), "--policy", "always"}).code == 2);
}

TEST_CASE("cli: verify exits 0 only when accepted") {
  testing::TempDir tmp;
  testing::GitRepo repo(tmp / "origin");
  const std::string source = "theorem t : True := by sorry\n";
  std::string commit = repo.commit({{"lean-toolchain", "leanprover/lean4:v4.24.0\n"}, {"A.lean", source}}, "init");

  SorryRecord r = testing::make_record(repo.remote(), "⊢ True", 1, scan_for_sorries(source).at(0).location.start_column);
  r.repo.commit = commit;
  r.id = compute_id(r);
  DatasetSnapshot snap;
  snap.name = "t";
  snap.cutoff = *UtcTime::parse("2026-01-01T00:00:00Z");
  snap.records = {r};
  snap.manifest = tally_manifest(snap.records, {});
  save_database({tmp / "db.json", snap});

  testing::write_json(tmp / "repl.json", json::parse(R"({"rules": [
    {"expect_substring": "True := by sorry", "response": {"env": 0, "sorries": [
      {"pos": {"line": 1, "column": 23}, "goal": "⊢ True", "proofState": 0}]}},
    {"expect_substring": "True := by trivial", "response": {"env": 1, "sorries": []}},
    {"expect_substring": "#print axioms", "response": {"env": 2, "messages": []}},
    {"expect_substring": "", "response": {"env": 1, "messages": [
      {"severity": "error", "pos": {"line": 1, "column": 0}, "data": "nope"}]}}
  ]})"));
  testing::write_text(tmp / "good.lean", "trivial\n");
  testing::write_text(tmp / "bad.lean", "simp\n");

  std::vector<std::string> common = {"--db",        (tmp / "db.json").string(), "--id",        r.id.substr(0, 12),
                                     "--cache-dir", (tmp / "cache").string(),   "--build-cmd", "true",
                                     "--mock-repl", (tmp / "repl.json").string()};
  auto run = [&](const std::string& proposal) {
    std::vector<std::string> args{"verify", "--proposal", (tmp / proposal).string()};
    args.insert(args.end(), common.begin(), common.end());
    return cli(args);
  };
  auto good = run("good.lean");
  CHECK(good.code == 0);
  json report = json::parse(good.out);
  CHECK(report["status"] == "Accepted");
  CHECK(report["sorry_id"] == r.id);

  auto bad = run("bad.lean");
  CHECK(bad.code == 1);
  CHECK(json::parse(bad.out)["status"] == "BuildFailure");

  auto unknown = cli({"verify", "--db", (tmp / "db.json").string(), "--id", "zzzz", "--proposal",
                      (tmp / "good.lean").string()});
  CHECK(unknown.code == 2);
}

TEST_CASE("cli: dedup rewrites the database") {
  testing::TempDir tmp;
  DatasetSnapshot snap;
  snap.name = "t";
  snap.cutoff = *UtcTime::parse("2026-01-01T00:00:00Z");
  snap.records = {testing::make_record("r", "⊢ P", 1, 23, "2025-01-01T00:00:00Z"),
                  testing::make_record("r", "⊢  P", 2, 23, "2025-02-01T00:00:00Z"),
                  testing::make_record("s", "⊢ P", 1, 23)};
  snap.manifest = tally_manifest(snap.records, {{"r", RepoCategory::Library}});
  save_database({tmp / "db.json", snap});
  auto r = cli({"dedup", "--db", (tmp / "db.json").string()});
  REQUIRE(r.code == 0);
  CHECK(r.err.find("removed 1 duplicates") != std::string::npos);
  Database db = load_database(tmp / "db.json");
  CHECK(db.snapshot.records.size() == 2);
  CHECK(db.snapshot.records[0].location.start_line == 2);
  CHECK(db.snapshot.manifest.repos.at("r").category == RepoCategory::Library);
  CHECK(validate_snapshot(db.snapshot).empty());
}

TEST_CASE("shipped config files mirror the built-in defaults") {
  const fs::path config = testing::fixtures().parent_path().parent_path() / "config";
  CHECK(load_license_allowlist(json::parse(read_file(config / "licenses.json"))) == default_license_allowlist());
  CHECK(load_category_rules(json::parse(read_file(config / "category_rules.json"))).size() == default_category_rules().size());
  auto provers = load_prover_configs(json::parse(read_file(config / "tactics.json")));
  REQUIRE(provers.size() == 1);
  CHECK(provers[0].tactics == default_tactics());
}
