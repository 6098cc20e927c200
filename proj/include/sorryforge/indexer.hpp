#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sorryforge/core_model.hpp"
#include "sorryforge/lean_bridge.hpp"
#include "sorryforge/repo_registry.hpp"
#include "sorryforge/scanner.hpp"

namespace sorryforge {

struct LeafCommit {
  std::string branch;
  std::string commit;
  UtcTime committed_at;

  bool operator==(const LeafCommit&) const = default;
};

/// Branch tips of the workspace's origin, sorted by branch name.
/// Throws Error(GitQueryFailed).
std::vector<LeafCommit> enumerate_leaf_commits(const Workspace& workspace);

/// Elaborates `file` (relative to the workspace root) as a whole.
/// Throws Error(ElaborationFailed) when the REPL reports errors.
ReplResponse elaborate_file(ReplSession& session, const std::string& file,
                            std::chrono::seconds timeout = kDefaultReplTimeout);

/// Matches a lexical hit against an elaboration result by exact start
/// position and asks the REPL whether the sorry's type is a proposition.
/// Throws Error(NoMatchingSorry).
GoalState goal_for_hit(ReplSession& session, const ReplResponse& elaborated, const ScanHit& hit,
                       std::chrono::seconds timeout = kDefaultReplTimeout);

/// elaborate_file + goal_for_hit.
GoalState extract_goal(ReplSession& session, const ScanHit& hit, const std::string& file,
                       std::chrono::seconds timeout = kDefaultReplTimeout);

/// The tactic used to probe whether a proof state's goal lives in Prop.
inline constexpr const char* kPropProbeTactic = "show (_ : Prop)";

struct BlameInfo {
  std::string blame_email_hash;
  UtcTime blame_date;
};

/// Blames location.start_line at the workspace commit. Throws Error(BlameFailed).
BlameInfo blame_metadata(const Workspace& workspace, const SourceLocation& location);

/// One survivor per (remote, normalized goal): greatest blame_date, then
/// greatest inclusion_date, then smallest id. Output ordered by remote, then
/// blame_date descending, then id.
std::vector<SorryRecord> deduplicate(std::vector<SorryRecord> records);

struct IndexStats {
  int build_failure = 0;
  int elaboration_failure = 0;
  int non_prop = 0;
  int no_match = 0;
  int duplicate = 0;

  IndexStats& operator+=(const IndexStats& other);
  bool operator==(const IndexStats&) const = default;
};

json to_json(const IndexStats& stats);

struct IndexOptions {
  std::filesystem::path cache_dir;
  BuildOptions build;
  Backend backend = RealBackend{};
  std::chrono::seconds repl_timeout = kDefaultReplTimeout;
  UtcTime inclusion_date = UtcTime::now();
};

struct RepoIndexResult {
  std::string remote;
  std::vector<SorryRecord> records;
  IndexStats stats;
  std::optional<std::string> error;  // set when the repository was abandoned
};

/// prepare -> build -> leaf commits -> scan -> extract -> blame -> Prop filter
/// -> deduplicate. Workspace errors propagate.
RepoIndexResult index_repository(const RepoListing& listing, const IndexOptions& options);

struct BatchResult {
  std::vector<SorryRecord> records;  // deduplicated, in dedup order
  IndexStats stats;
  std::vector<RepoIndexResult> repos;  // input order, records cleared
  std::map<std::string, RepoCategory> categories;
};

/// Indexes listings on a bounded pool; a failing repository is recorded in
/// its RepoIndexResult and never aborts the batch.
BatchResult index_batch(const std::vector<RepoListing>& listings, const IndexOptions& options,
                        const std::vector<CategoryRule>& rules, int workers = 4);

}  // namespace sorryforge
