#include "sorryforge/indexer.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>
#include <tuple>

#include "git.hpp"
#include "pool.hpp"
#include "sorryforge/fs_util.hpp"

namespace fs = std::filesystem;

namespace sorryforge {

std::vector<LeafCommit> enumerate_leaf_commits(const Workspace& workspace) {
  const std::string prefix = "refs/remotes/origin/";
  std::string out = git::run({"for-each-ref", "--format=%(refname)%09%(objectname)%09%(committerdate:unix)",
                              "refs/remotes/origin"},
                             workspace.root, ErrorCode::GitQueryFailed);
  std::vector<LeafCommit> leaves;
  std::istringstream in(out);
  for (std::string line; std::getline(in, line);) {
    std::istringstream fields(line);
    std::string ref, commit, unix_time;
    if (!std::getline(fields, ref, '\t') || !std::getline(fields, commit, '\t') ||
        !std::getline(fields, unix_time)) {
      throw Error(ErrorCode::GitQueryFailed, "unexpected for-each-ref line: " + line);
    }
    if (ref.rfind(prefix, 0) != 0) continue;
    std::string branch = ref.substr(prefix.size());
    if (branch == "HEAD") continue;
    leaves.push_back({branch, commit, UtcTime::from_unix(std::stoll(unix_time))});
  }
  std::sort(leaves.begin(), leaves.end(),
            [](const LeafCommit& a, const LeafCommit& b) { return a.branch < b.branch; });
  return leaves;
}

ReplResponse elaborate_file(ReplSession& session, const std::string& file, std::chrono::seconds timeout) {
  ReplResponse r = session.check_file(FileRequest{file, std::nullopt}, timeout);
  if (r.has_errors()) {
    std::string first = r.error_messages().front();
    throw Error(ErrorCode::ElaborationFailed, file + ": " + first);
  }
  return r;
}

GoalState goal_for_hit(ReplSession& session, const ReplResponse& elaborated, const ScanHit& hit,
                       std::chrono::seconds timeout) {
  const ReplPosition want{hit.location.start_line, hit.location.start_column};
  auto it = std::find_if(elaborated.sorries.begin(), elaborated.sorries.end(),
                         [&](const ReplSorry& s) { return s.pos == want; });
  if (it == elaborated.sorries.end()) {
    throw Error(ErrorCode::NoMatchingSorry, "no elaborated sorry at " + std::to_string(want.line) + ":" +
                                                std::to_string(want.column));
  }
  ReplResponse probe = session.check_file(TacticRequest{kPropProbeTactic, it->proof_state}, timeout);
  return GoalState{it->goal, !probe.has_errors()};
}

GoalState extract_goal(ReplSession& session, const ScanHit& hit, const std::string& file,
                       std::chrono::seconds timeout) {
  return goal_for_hit(session, elaborate_file(session, file, timeout), hit, timeout);
}

BlameInfo blame_metadata(const Workspace& workspace, const SourceLocation& location) {
  const std::string line = std::to_string(location.start_line);
  std::string out = git::run({"blame", "--porcelain", "-L", line + "," + line, workspace.coords.commit, "--",
                              location.path},
                             workspace.root, ErrorCode::BlameFailed);
  std::optional<std::string> email;
  std::optional<std::int64_t> when;
  std::istringstream in(out);
  for (std::string l; std::getline(in, l);) {
    if (l.rfind("author-mail ", 0) == 0) {
      std::string e = l.substr(12);
      if (e.size() >= 2 && e.front() == '<' && e.back() == '>') e = e.substr(1, e.size() - 2);
      email = e;
    } else if (l.rfind("author-time ", 0) == 0) {
      when = std::stoll(l.substr(12));
    } else if (!l.empty() && l.front() == '\t') {
      break;  // the line content ends the header block
    }
  }
  if (!email || !when) throw Error(ErrorCode::BlameFailed, "incomplete blame for " + location.path + ":" + line);
  return {hash_email(*email), UtcTime::from_unix(*when)};
}

std::vector<SorryRecord> deduplicate(std::vector<SorryRecord> records) {
  // Survivor preference: newest blame, newest inclusion, smallest id.
  auto better = [](const SorryRecord& a, const SorryRecord& b) {
    return std::make_tuple(a.metadata.blame_date, a.metadata.inclusion_date) >
               std::make_tuple(b.metadata.blame_date, b.metadata.inclusion_date) ||
           (std::make_tuple(a.metadata.blame_date, a.metadata.inclusion_date) ==
                std::make_tuple(b.metadata.blame_date, b.metadata.inclusion_date) &&
            a.id < b.id);
  };
  std::map<std::pair<std::string, std::string>, std::size_t> best;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto key = std::make_pair(records[i].repo.remote, normalize_goal(records[i].debug_info.goal));
    auto [it, inserted] = best.emplace(key, i);
    if (!inserted && better(records[i], records[it->second])) it->second = i;
  }
  std::vector<SorryRecord> out;
  out.reserve(best.size());
  for (const auto& [key, index] : best) out.push_back(std::move(records[index]));
  std::sort(out.begin(), out.end(), [](const SorryRecord& a, const SorryRecord& b) {
    if (a.repo.remote != b.repo.remote) return a.repo.remote < b.repo.remote;
    if (a.metadata.blame_date != b.metadata.blame_date) return a.metadata.blame_date > b.metadata.blame_date;
    return a.id < b.id;
  });
  return out;
}

IndexStats& IndexStats::operator+=(const IndexStats& o) {
  build_failure += o.build_failure;
  elaboration_failure += o.elaboration_failure;
  non_prop += o.non_prop;
  no_match += o.no_match;
  duplicate += o.duplicate;
  return *this;
}

json to_json(const IndexStats& s) {
  return {{"build_failure", s.build_failure},
          {"elaboration_failure", s.elaboration_failure},
          {"non_prop", s.non_prop},
          {"no_match", s.no_match},
          {"duplicate", s.duplicate}};
}

namespace {

std::string blob_url(const std::string& remote, const std::string& commit, const SourceLocation& loc) {
  std::string base = remote;
  if (base.size() > 4 && base.compare(base.size() - 4, 4, ".git") == 0) base.resize(base.size() - 4);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return base + "/blob/" + commit + "/" + loc.path + "#L" + std::to_string(loc.start_line);
}

std::vector<std::string> lean_files(const Workspace& ws) {
  std::string out = git::run({"ls-files", "-z", "--", "*.lean"}, ws.root, ErrorCode::GitQueryFailed);
  std::vector<std::string> files;
  std::size_t start = 0;
  while (start < out.size()) {
    std::size_t end = out.find('\0', start);
    if (end == std::string::npos) end = out.size();
    if (end > start) files.push_back(out.substr(start, end - start));
    start = end + 1;
  }
  std::sort(files.begin(), files.end());
  return files;
}

void index_commit(const Workspace& ws, const IndexOptions& options, std::vector<SorryRecord>& out,
                  IndexStats& stats) {
  auto session = open_session(ws, options.backend);
  for (const std::string& file : lean_files(ws)) {
    std::vector<ScanHit> hits = scan_for_sorries(read_file(ws.root / file));
    if (hits.empty()) continue;

    ReplResponse elaborated;
    try {
      elaborated = elaborate_file(*session, file, options.repl_timeout);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ElaborationFailed && e.code() != ErrorCode::Timeout) throw;
      stats.elaboration_failure += static_cast<int>(hits.size());
      if (e.code() == ErrorCode::Timeout) session = open_session(ws, options.backend);
      continue;
    }

    for (ScanHit& hit : hits) {
      hit.location.path = file;
      GoalState goal;
      try {
        goal = goal_for_hit(*session, elaborated, hit, options.repl_timeout);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoMatchingSorry) throw;
        ++stats.no_match;
        continue;
      }
      if (!goal.is_prop) {
        ++stats.non_prop;
        continue;
      }
      SorryRecord r;
      r.repo = ws.coords;
      r.repo.lean_version = ws.toolchain;
      r.location = hit.location;
      r.debug_info.goal = goal.pretty;
      r.debug_info.url = blob_url(ws.coords.remote, ws.coords.commit, r.location);
      BlameInfo blame = blame_metadata(ws, r.location);
      r.metadata.blame_email_hash = blame.blame_email_hash;
      r.metadata.blame_date = blame.blame_date;
      r.metadata.inclusion_date = options.inclusion_date;
      r.id = compute_id(r);
      out.push_back(std::move(r));
    }
  }
  session->close();
}

}  // namespace

RepoIndexResult index_repository(const RepoListing& listing, const IndexOptions& options) {
  RepoIndexResult result;
  result.remote = listing.remote;

  const std::string head = resolve_remote_head(listing.remote);
  Workspace head_ws = prepare_workspace({listing.remote, "", head, ""}, options.cache_dir);
  // A cached checkout may predate branches created since; refresh its refs.
  git::run({"fetch", "--quiet", "--prune", "origin"}, head_ws.root, ErrorCode::GitQueryFailed);

  std::vector<SorryRecord> found;
  for (const LeafCommit& leaf : enumerate_leaf_commits(head_ws)) {
    Workspace ws = prepare_workspace({listing.remote, leaf.branch, leaf.commit, ""}, options.cache_dir);
    ws = build_workspace(std::move(ws), options.build);
    if (ws.build_state.status != BuildStatus::Built) {
      ++result.stats.build_failure;
      continue;
    }
    index_commit(ws, options, found, result.stats);
  }

  const std::size_t before = found.size();
  result.records = deduplicate(std::move(found));
  result.stats.duplicate = static_cast<int>(before - result.records.size());
  return result;
}

BatchResult index_batch(const std::vector<RepoListing>& listings, const IndexOptions& options,
                        const std::vector<CategoryRule>& rules, int workers) {
  BatchResult batch;
  batch.repos.resize(listings.size());
  parallel_for(listings.size(), workers, [&](std::size_t i) {
    try {
      batch.repos[i] = index_repository(listings[i], options);
    } catch (const std::exception& e) {
      batch.repos[i].remote = listings[i].remote;
      batch.repos[i].error = e.what();
    }
  });

  std::vector<SorryRecord> all;
  for (std::size_t i = 0; i < listings.size(); ++i) {
    auto& repo = batch.repos[i];
    batch.stats += repo.stats;
    batch.categories[listings[i].remote] =
        listings[i].category ? *listings[i].category : assign_category(listings[i], rules);
    std::move(repo.records.begin(), repo.records.end(), std::back_inserter(all));
    repo.records.clear();
  }
  const std::size_t before = all.size();
  batch.records = deduplicate(std::move(all));
  batch.stats.duplicate += static_cast<int>(before - batch.records.size());
  return batch;
}

}  // namespace sorryforge
