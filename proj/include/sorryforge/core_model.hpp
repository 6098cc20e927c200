#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sorryforge/timestamp.hpp"

namespace sorryforge {

using json = nlohmann::json;

struct RepoCoordinates {
  std::string remote;
  std::string branch;
  std::string commit;  // 40 lowercase hex
  std::string lean_version;

  bool operator==(const RepoCoordinates&) const = default;
};

// Lines are 1-based, columns 0-based and counted in code points; the end
// column is exclusive.
struct SourceLocation {
  std::string path;
  int start_line = 1;
  int start_column = 0;
  int end_line = 1;
  int end_column = 0;

  bool operator==(const SourceLocation&) const = default;
};

struct GoalState {
  std::string pretty;
  bool is_prop = false;

  bool operator==(const GoalState&) const = default;
};

struct DebugInfo {
  std::string goal;
  std::string url;

  bool operator==(const DebugInfo&) const = default;
};

struct RecordMetadata {
  std::string blame_email_hash;
  UtcTime blame_date;
  UtcTime inclusion_date;

  bool operator==(const RecordMetadata&) const = default;
};

struct SorryRecord {
  RepoCoordinates repo;
  SourceLocation location;
  DebugInfo debug_info;
  RecordMetadata metadata;
  std::string id;

  bool operator==(const SorryRecord&) const = default;
};

enum class RepoCategory { Pedagogical, Tooling, Benchmark, Library, Formalization };

inline constexpr RepoCategory kAllCategories[] = {
    RepoCategory::Pedagogical, RepoCategory::Tooling, RepoCategory::Benchmark,
    RepoCategory::Library, RepoCategory::Formalization};

std::string_view to_string(RepoCategory category);
std::optional<RepoCategory> parse_category(std::string_view text);

struct ProofProposal {
  std::string sorry_id;
  std::string text;
  std::string origin;
  int iteration = 0;

  bool operator==(const ProofProposal&) const = default;
};

enum class VerdictStatus {
  Accepted,
  BuildFailure,
  SorryCountUnchanged,
  SorryCountOverDecreased,
  OtherGoalChanged,
  ForbiddenAxiom,
  Timeout,
  EnvironmentError,
};

std::string_view to_string(VerdictStatus status);
std::optional<VerdictStatus> parse_verdict_status(std::string_view text);

struct VerificationVerdict {
  VerdictStatus status = VerdictStatus::EnvironmentError;
  std::vector<std::string> messages;
  std::int64_t elapsed_ms = 0;

  bool accepted() const { return status == VerdictStatus::Accepted; }
  bool operator==(const VerificationVerdict&) const = default;
};

struct RepoTally {
  int count = 0;
  std::optional<RepoCategory> category;

  bool operator==(const RepoTally&) const = default;
};

struct Manifest {
  std::map<std::string, RepoTally> repos;  // keyed by remote
  std::map<RepoCategory, int> categories;

  bool operator==(const Manifest&) const = default;
};

struct DatasetSnapshot {
  std::string name;
  UtcTime cutoff;
  std::vector<SorryRecord> records;
  Manifest manifest;

  bool operator==(const DatasetSnapshot&) const = default;
};

// Content addressing ---------------------------------------------------------

/// The exact bytes hashed into a record id: compact JSON with sorted keys over
/// repo.{remote,commit}, location.{path,start_line,start_column} and
/// debug_info.goal. Throws Error(MissingField) if any of them is empty.
std::string canonical_serialization(const SorryRecord& record);

/// SHA-256 over canonical_serialization(); the record's own id is ignored.
std::string compute_id(const SorryRecord& record);

/// Unicode NFC, then whitespace runs collapsed to one space, then trimmed.
std::string normalize_goal(std::string_view text);

/// Empty iff every record invariant holds, including the stored id.
std::vector<std::string> validate_record(const SorryRecord& record);

/// SHA-256 of the lowercased, trimmed author email.
std::string hash_email(std::string_view email);

// Snapshot helpers -----------------------------------------------------------

/// Per-repo and per-category counts over `records`, keeping categories known
/// from `categories` (remote -> category).
Manifest tally_manifest(const std::vector<SorryRecord>& records,
                        const std::map<std::string, RepoCategory>& categories);

std::map<std::string, RepoCategory> categories_of(const Manifest& manifest);

std::vector<std::string> validate_snapshot(const DatasetSnapshot& snapshot);

// JSON -----------------------------------------------------------------------

json to_json(const SorryRecord& record);
/// Strict: every schema field must be present with the right type. Throws
/// Error(MissingField) naming the dotted field path.
SorryRecord record_from_json(const json& j);

json to_json(const Manifest& manifest);
Manifest manifest_from_json(const json& j);

json to_json(const ProofProposal& proposal);
ProofProposal proposal_from_json(const json& j);

json to_json(const VerificationVerdict& verdict);
VerificationVerdict verdict_from_json(const json& j);

/// The unit record consumed by the evaluation harness:
/// {sorry_id, origin, iteration, status, messages, elapsed_ms}.
json verdict_report(const ProofProposal& proposal, const VerificationVerdict& verdict);

}  // namespace sorryforge
