#include "sorryforge/core_model.hpp"

#include <algorithm>
#include <memory>

#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "sorryforge/errors.hpp"
#include "sorryforge/hashing.hpp"

namespace sorryforge {

std::string_view to_string(RepoCategory category) {
  switch (category) {
    case RepoCategory::Pedagogical: return "Pedagogical";
    case RepoCategory::Tooling: return "Tooling";
    case RepoCategory::Benchmark: return "Benchmark";
    case RepoCategory::Library: return "Library";
    case RepoCategory::Formalization: return "Formalization";
  }
  return "Formalization";
}

std::optional<RepoCategory> parse_category(std::string_view text) {
  for (RepoCategory c : kAllCategories) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::string_view to_string(VerdictStatus status) {
  switch (status) {
    case VerdictStatus::Accepted: return "Accepted";
    case VerdictStatus::BuildFailure: return "BuildFailure";
    case VerdictStatus::SorryCountUnchanged: return "SorryCountUnchanged";
    case VerdictStatus::SorryCountOverDecreased: return "SorryCountOverDecreased";
    case VerdictStatus::OtherGoalChanged: return "OtherGoalChanged";
    case VerdictStatus::ForbiddenAxiom: return "ForbiddenAxiom";
    case VerdictStatus::Timeout: return "Timeout";
    case VerdictStatus::EnvironmentError: return "EnvironmentError";
  }
  return "EnvironmentError";
}

std::optional<VerdictStatus> parse_verdict_status(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(VerdictStatus::EnvironmentError); ++i) {
    auto s = static_cast<VerdictStatus>(i);
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string canonical_serialization(const SorryRecord& record) {
  auto require = [](const std::string& value, const char* field) {
    if (value.empty()) throw Error(ErrorCode::MissingField, field);
  };
  require(record.repo.remote, "repo.remote");
  require(record.repo.commit, "repo.commit");
  require(record.location.path, "location.path");
  require(record.debug_info.goal, "debug_info.goal");

  // nlohmann::json objects are std::map backed, so keys serialize sorted and
  // dump() without indentation emits no insignificant whitespace.
  json canonical = {
      {"debug_info", {{"goal", record.debug_info.goal}}},
      {"location",
       {{"path", record.location.path},
        {"start_column", record.location.start_column},
        {"start_line", record.location.start_line}}},
      {"repo", {{"commit", record.repo.commit}, {"remote", record.repo.remote}}},
  };
  return canonical.dump();
}

std::string compute_id(const SorryRecord& record) {
  return sha256_hex(canonical_serialization(record));
}

std::string normalize_goal(std::string_view text) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  std::string composed;
  if (U_SUCCESS(status)) {
    icu::UnicodeString source = icu::UnicodeString::fromUTF8(
        icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));
    icu::UnicodeString normalized = nfc->normalize(source, status);
    if (U_SUCCESS(status)) normalized.toUTF8String(composed);
  }
  if (U_FAILURE(status)) composed.assign(text);

  std::string out;
  out.reserve(composed.size());
  bool pending_space = false;
  for (char c : composed) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

std::string hash_email(std::string_view email) {
  auto first = email.find_first_not_of(" \t\r\n");
  auto last = email.find_last_not_of(" \t\r\n");
  std::string trimmed =
      first == std::string_view::npos ? std::string() : std::string(email.substr(first, last - first + 1));
  std::transform(trimmed.begin(), trimmed.end(), trimmed.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return sha256_hex(trimmed);
}

std::vector<std::string> validate_record(const SorryRecord& r) {
  std::vector<std::string> v;
  if (r.repo.remote.empty()) v.emplace_back("remote: empty");
  if (r.repo.branch.empty()) v.emplace_back("branch: empty");
  if (r.repo.commit.size() != 40) {
    v.emplace_back("commit: wrong length");
  } else if (!is_lower_hex(r.repo.commit, 40)) {
    v.emplace_back("commit: not lowercase hex");
  }
  if (r.repo.lean_version.empty()) v.emplace_back("lean_version: empty");

  const auto& loc = r.location;
  if (loc.path.empty()) {
    v.emplace_back("path: empty");
  } else {
    if (loc.path.front() == '/') v.emplace_back("path: leading slash");
    std::string_view rest = loc.path;
    while (!rest.empty()) {
      auto slash = rest.find('/');
      std::string_view segment = rest.substr(0, slash);
      if (segment == "..") {
        v.emplace_back("path: parent segment");
        break;
      }
      if (slash == std::string_view::npos) break;
      rest.remove_prefix(slash + 1);
    }
  }
  if (loc.start_line < 1) v.emplace_back("start_line: must be >= 1");
  if (loc.start_column < 0 || loc.end_column < 0) v.emplace_back("column: negative");
  if (std::pair(loc.start_line, loc.start_column) >= std::pair(loc.end_line, loc.end_column)) {
    v.emplace_back("location: start does not precede end");
  }

  if (r.debug_info.goal.empty()) v.emplace_back("goal: empty");
  if (r.debug_info.url.empty()) v.emplace_back("url: empty");

  if (!is_lower_hex(r.metadata.blame_email_hash, 64)) {
    v.emplace_back("blame_email_hash: not a 64-hex digest");
  }
  if (r.metadata.blame_date > r.metadata.inclusion_date) {
    v.emplace_back("metadata: blame_date after inclusion_date");
  }

  if (!is_lower_hex(r.id, 64)) {
    v.emplace_back("id: not a 64-hex digest");
  } else if (!r.repo.remote.empty() && !r.repo.commit.empty() && !loc.path.empty() &&
             !r.debug_info.goal.empty() && compute_id(r) != r.id) {
    v.emplace_back("id: digest mismatch");
  }
  return v;
}

Manifest tally_manifest(const std::vector<SorryRecord>& records,
                        const std::map<std::string, RepoCategory>& categories) {
  Manifest m;
  for (const auto& r : records) {
    auto& tally = m.repos[r.repo.remote];
    ++tally.count;
  }
  for (auto& [remote, tally] : m.repos) {
    if (auto it = categories.find(remote); it != categories.end()) {
      tally.category = it->second;
      m.categories[it->second] += tally.count;
    }
  }
  return m;
}

std::map<std::string, RepoCategory> categories_of(const Manifest& manifest) {
  std::map<std::string, RepoCategory> out;
  for (const auto& [remote, tally] : manifest.repos) {
    if (tally.category) out.emplace(remote, *tally.category);
  }
  return out;
}

std::vector<std::string> validate_snapshot(const DatasetSnapshot& snapshot) {
  std::vector<std::string> v;
  std::vector<std::string> ids;
  ids.reserve(snapshot.records.size());
  for (std::size_t i = 0; i < snapshot.records.size(); ++i) {
    const auto& r = snapshot.records[i];
    ids.push_back(r.id);
    if (r.metadata.inclusion_date > snapshot.cutoff) {
      v.push_back("record " + std::to_string(i) + ": inclusion_date after cutoff");
    }
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) v.emplace_back("ids: not unique");
  int total = 0;
  for (const auto& [remote, tally] : snapshot.manifest.repos) total += tally.count;
  if (total != static_cast<int>(snapshot.records.size())) {
    v.emplace_back("manifest: repo counts do not sum to record count");
  }
  return v;
}

// JSON -----------------------------------------------------------------------

namespace {

const json& field(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw Error(ErrorCode::MissingField, path + ": not an object");
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    throw Error(ErrorCode::MissingField, path.empty() ? key : path + "." + key);
  }
  return *it;
}

std::string string_field(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_string()) {
    throw Error(ErrorCode::MissingField, (path.empty() ? "" : path + ".") + key + ": not a string");
  }
  return v.get<std::string>();
}

int int_field(const json& j, const char* key, const std::string& path) {
  const json& v = field(j, key, path);
  if (!v.is_number_integer()) {
    throw Error(ErrorCode::MissingField, (path.empty() ? "" : path + ".") + key + ": not an integer");
  }
  return v.get<int>();
}

UtcTime time_field(const json& j, const char* key, const std::string& path) {
  auto text = string_field(j, key, path);
  auto t = UtcTime::parse(text);
  if (!t) {
    throw Error(ErrorCode::MissingField,
                (path.empty() ? "" : path + ".") + key + ": not an RFC 3339 timestamp");
  }
  return *t;
}

}  // namespace

json to_json(const SorryRecord& r) {
  return {
      {"repo",
       {{"remote", r.repo.remote},
        {"branch", r.repo.branch},
        {"commit", r.repo.commit},
        {"lean_version", r.repo.lean_version}}},
      {"location",
       {{"path", r.location.path},
        {"start_line", r.location.start_line},
        {"start_column", r.location.start_column},
        {"end_line", r.location.end_line},
        {"end_column", r.location.end_column}}},
      {"debug_info", {{"goal", r.debug_info.goal}, {"url", r.debug_info.url}}},
      {"metadata",
       {{"blame_email_hash", r.metadata.blame_email_hash},
        {"blame_date", r.metadata.blame_date.to_string()},
        {"inclusion_date", r.metadata.inclusion_date.to_string()}}},
      {"id", r.id},
  };
}

SorryRecord record_from_json(const json& j) {
  SorryRecord r;
  const json& repo = field(j, "repo", "");
  r.repo.remote = string_field(repo, "remote", "repo");
  r.repo.branch = string_field(repo, "branch", "repo");
  r.repo.commit = string_field(repo, "commit", "repo");
  r.repo.lean_version = string_field(repo, "lean_version", "repo");
  const json& loc = field(j, "location", "");
  r.location.path = string_field(loc, "path", "location");
  r.location.start_line = int_field(loc, "start_line", "location");
  r.location.start_column = int_field(loc, "start_column", "location");
  r.location.end_line = int_field(loc, "end_line", "location");
  r.location.end_column = int_field(loc, "end_column", "location");
  const json& debug = field(j, "debug_info", "");
  r.debug_info.goal = string_field(debug, "goal", "debug_info");
  r.debug_info.url = string_field(debug, "url", "debug_info");
  const json& meta = field(j, "metadata", "");
  r.metadata.blame_email_hash = string_field(meta, "blame_email_hash", "metadata");
  r.metadata.blame_date = time_field(meta, "blame_date", "metadata");
  r.metadata.inclusion_date = time_field(meta, "inclusion_date", "metadata");
  r.id = string_field(j, "id", "");
  return r;
}

json to_json(const Manifest& m) {
  json repos = json::object();
  for (const auto& [remote, tally] : m.repos) {
    json entry = {{"count", tally.count}};
    entry["category"] = tally.category ? json(std::string(to_string(*tally.category))) : json();
    repos[remote] = std::move(entry);
  }
  json cats = json::object();
  for (const auto& [cat, count] : m.categories) cats[std::string(to_string(cat))] = count;
  return {{"repos", repos}, {"categories", cats}};
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  if (!j.is_object()) return m;
  if (auto it = j.find("repos"); it != j.end() && it->is_object()) {
    for (const auto& [remote, entry] : it->items()) {
      RepoTally t;
      t.count = entry.value("count", 0);
      if (auto c = entry.find("category"); c != entry.end() && c->is_string()) {
        t.category = parse_category(c->get<std::string>());
      }
      m.repos.emplace(remote, t);
    }
  }
  if (auto it = j.find("categories"); it != j.end() && it->is_object()) {
    for (const auto& [name, count] : it->items()) {
      if (auto c = parse_category(name)) m.categories[*c] = count.get<int>();
    }
  }
  return m;
}

json to_json(const ProofProposal& p) {
  return {{"sorry_id", p.sorry_id}, {"text", p.text}, {"origin", p.origin}, {"iteration", p.iteration}};
}

ProofProposal proposal_from_json(const json& j) {
  return {string_field(j, "sorry_id", "proposal"), string_field(j, "text", "proposal"),
          string_field(j, "origin", "proposal"), int_field(j, "iteration", "proposal")};
}

json to_json(const VerificationVerdict& v) {
  return {{"status", std::string(to_string(v.status))}, {"messages", v.messages},
          {"elapsed_ms", v.elapsed_ms}};
}

VerificationVerdict verdict_from_json(const json& j) {
  VerificationVerdict v;
  auto status = parse_verdict_status(string_field(j, "status", "verdict"));
  if (!status) throw Error(ErrorCode::MissingField, "verdict.status: unknown value");
  v.status = *status;
  v.messages = j.value("messages", std::vector<std::string>{});
  v.elapsed_ms = j.value("elapsed_ms", std::int64_t{0});
  return v;
}

json verdict_report(const ProofProposal& proposal, const VerificationVerdict& verdict) {
  return {{"sorry_id", proposal.sorry_id},
          {"origin", proposal.origin},
          {"iteration", proposal.iteration},
          {"status", std::string(to_string(verdict.status))},
          {"messages", verdict.messages},
          {"elapsed_ms", verdict.elapsed_ms}};
}

}  // namespace sorryforge
