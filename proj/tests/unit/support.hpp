#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "sorryforge/core_model.hpp"
#include "sorryforge/eval_harness.hpp"
#include "sorryforge/fs_util.hpp"
#include "sorryforge/hashing.hpp"
#include "sorryforge/subprocess.hpp"

#ifndef SORRYFORGE_FIXTURES
#define SORRYFORGE_FIXTURES "tests/fixtures"
#endif

namespace testing {

namespace fs = std::filesystem;
using sorryforge::json;

inline fs::path fixtures() { return fs::path(SORRYFORGE_FIXTURES); }

struct TempDir {
  fs::path path;

  TempDir() {
    static std::random_device rd;
    path = fs::temp_directory_path() / ("sorryforge-test-" + std::to_string(rd()) + "-" + sorryforge::unique_suffix());
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  fs::path operator/(const std::string& rel) const { return path / rel; }
};

inline void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2)); }

// Runs git with a fixed identity and dates so fixtures are reproducible.
inline std::string git(const fs::path& dir, const std::vector<std::string>& args,
                       const std::string& date = "2025-03-01T12:00:00Z",
                       const std::string& email = "Dev@Example.org") {
  std::vector<std::string> argv{"git"};
  argv.insert(argv.end(), args.begin(), args.end());
  sorryforge::ProcessOptions o;
  o.cwd = dir;
  o.env = {{"GIT_AUTHOR_NAME", "Dev"},       {"GIT_AUTHOR_EMAIL", email},
           {"GIT_COMMITTER_NAME", "Dev"},    {"GIT_COMMITTER_EMAIL", email},
           {"GIT_AUTHOR_DATE", date},        {"GIT_COMMITTER_DATE", date},
           {"GIT_CONFIG_NOSYSTEM", "1"},     {"HOME", dir.string()},
           {"GIT_TERMINAL_PROMPT", "0"}};
  auto r = sorryforge::run_process(argv, o);
  if (!r.ok()) throw std::runtime_error("git failed: " + r.err);
  auto out = r.out;
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

// A throwaway repository with a "main" branch.
struct GitRepo {
  fs::path dir;

  explicit GitRepo(fs::path d) : dir(std::move(d)) {
    fs::create_directories(dir);
    git(dir, {"init", "--quiet", "--initial-branch=main"});
  }

  std::string remote() const { return "file://" + dir.string(); }

  std::string commit(const std::map<std::string, std::string>& files, const std::string& message,
                     const std::string& date = "2025-03-01T12:00:00Z", const std::string& email = "Dev@Example.org") {
    for (const auto& [rel, text] : files) write_text(dir / rel, text);
    git(dir, {"add", "-A"});
    git(dir, {"commit", "--quiet", "-m", message}, date, email);
    return git(dir, {"rev-parse", "HEAD"});
  }

  void checkout(const std::string& branch, bool create = false) {
    if (create) {
      git(dir, {"checkout", "--quiet", "-b", branch});
    } else {
      git(dir, {"checkout", "--quiet", branch});
    }
  }
};

// A record that passes validate_record.
inline sorryforge::SorryRecord make_record(const std::string& remote, const std::string& goal, int line = 1,
                                           int column = 23, const std::string& blame = "2025-01-01T00:00:00Z",
                                           const std::string& inclusion = "2025-07-01T00:00:00Z",
                                           const std::string& path = "A.lean") {
  sorryforge::SorryRecord r;
  r.repo = {remote, "main", std::string(40, 'a'), "v4.24.0"};
  r.location = {path, line, column, line, column + 5};
  r.debug_info = {goal, remote + "/blob/" + std::string(40, 'a') + "/" + path};
  r.metadata.blame_email_hash = sorryforge::hash_email("dev@example.org");
  r.metadata.blame_date = *sorryforge::UtcTime::parse(blame);
  r.metadata.inclusion_date = *sorryforge::UtcTime::parse(inclusion);
  r.id = sorryforge::compute_id(r);
  return r;
}

// Two deterministic provers over 1000 tasks: "trivial" solves tasks 0..20,
// "tactics" solves 0..83 (rates 0.021 and 0.084).
struct MetricsFixture {
  std::vector<sorryforge::RunRecord> runs;
  std::vector<sorryforge::ProverConfig> configs;
};

inline MetricsFixture table_fixture() {
  using namespace sorryforge;
  MetricsFixture f;
  ProverConfig trivial;
  trivial.id = "trivial";
  trivial.label = "Trivial";
  trivial.group = "Deterministic";
  trivial.tactics = {"trivial"};
  ProverConfig tactics = trivial;
  tactics.id = "tactics";
  tactics.label = "Tactics";
  tactics.tactics = default_tactics();
  f.configs = {trivial, tactics};
  for (int t = 0; t < 1000; ++t) {
    std::string id = sha256_hex("task " + std::to_string(t));
    for (const auto& [prover, solved_below] : {std::pair{"trivial", 21}, std::pair{"tactics", 84}}) {
      RunRecord r;
      r.sorry_id = id;
      r.prover_id = prover;
      r.solved = t < solved_below;
      AttemptRecord a;
      a.proposal = {id, "trivial", prover, 0};
      a.verdict.status = r.solved ? VerdictStatus::Accepted : VerdictStatus::BuildFailure;
      r.attempts.push_back(a);
      f.runs.push_back(std::move(r));
    }
  }
  return f;
}

}  // namespace testing
