#pragma once

#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sorryforge/core_model.hpp"

namespace sorryforge {

struct RepoListing {
  std::string name;
  std::string remote;
  std::string license_id;
  UtcTime last_update;
  bool is_public = false;
  std::optional<RepoCategory> category;  // nullopt == Unassigned

  bool operator==(const RepoListing&) const = default;
};

struct SinceDate {
  UtcTime cutoff;
};

struct WithinWindow {
  int days = 90;
};

// Default is a rolling 90-day window.
using ActivityPolicy = std::variant<SinceDate, WithinWindow>;

/// Parses "since:2025-01-01", "since:<rfc3339>" or "window:90".
std::optional<ActivityPolicy> parse_policy(std::string_view text);

struct CategoryRule {
  std::string pattern;
  RepoCategory category;
};

struct IngestResult {
  std::vector<RepoListing> listings;
  int dropped = 0;
  std::vector<std::string> drop_reasons;
};

/// Registry document: JSON list of {name, remote, license, last_update,
/// visibility}. Entries without remote or license are dropped and counted;
/// a second entry with an already-seen remote is dropped too.
/// Throws Error(MalformedDocument) when the top level is not a list.
IngestResult ingest_registry(const json& document);

/// Default allow-list of OSI-approved SPDX identifiers.
std::set<std::string> default_license_allowlist();
std::set<std::string> load_license_allowlist(const json& document);

std::vector<RepoListing> filter_eligible(const std::vector<RepoListing>& listings,
                                         const ActivityPolicy& policy, UtcTime now,
                                         const std::set<std::string>& licenses =
                                             default_license_allowlist());

/// First rule whose pattern occurs (case-insensitively) in the name or the
/// remote wins. Rules must be non-empty and end with a catch-all; a pattern
/// of "." or "" matches everything.
RepoCategory assign_category(const RepoListing& listing, const std::vector<CategoryRule>& rules);

std::vector<CategoryRule> default_category_rules();
std::vector<CategoryRule> load_category_rules(const json& document);

json to_json(const RepoListing& listing);
RepoListing listing_from_json(const json& j);
json to_json(const std::vector<RepoListing>& listings);
std::vector<RepoListing> listings_from_json(const json& j);

}  // namespace sorryforge
