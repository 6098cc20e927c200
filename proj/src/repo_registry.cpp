#include "sorryforge/repo_registry.hpp"

#include <algorithm>
#include <cctype>

#include "sorryforge/errors.hpp"

namespace sorryforge {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<UtcTime> parse_date_or_time(std::string_view text) {
  if (auto t = UtcTime::parse(text)) return t;
  if (text.size() == 10) return UtcTime::parse(std::string(text) + "T00:00:00Z");
  return std::nullopt;
}

std::string string_or_empty(const json& entry, const char* key) {
  auto it = entry.find(key);
  if (it == entry.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

}  // namespace

std::optional<ActivityPolicy> parse_policy(std::string_view text) {
  if (text.rfind("since:", 0) == 0) {
    auto t = parse_date_or_time(text.substr(6));
    if (!t) return std::nullopt;
    return SinceDate{*t};
  }
  if (text.rfind("window:", 0) == 0) {
    auto digits = text.substr(7);
    if (digits.empty() || !std::all_of(digits.begin(), digits.end(), ::isdigit)) return std::nullopt;
    int days = std::stoi(std::string(digits));
    if (days < 1) return std::nullopt;
    return WithinWindow{days};
  }
  return std::nullopt;
}

IngestResult ingest_registry(const json& document) {
  if (!document.is_array()) {
    throw Error(ErrorCode::MalformedDocument, "registry document must be a JSON list of entries");
  }
  IngestResult result;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < document.size(); ++i) {
    const json& entry = document[i];
    auto drop = [&](const std::string& why) {
      ++result.dropped;
      result.drop_reasons.push_back("entry " + std::to_string(i) + ": " + why);
    };
    if (!entry.is_object()) {
      drop("not an object");
      continue;
    }
    RepoListing listing;
    listing.name = string_or_empty(entry, "name");
    listing.remote = string_or_empty(entry, "remote");
    listing.license_id = string_or_empty(entry, "license");
    if (listing.remote.empty()) {
      drop("missing remote");
      continue;
    }
    if (listing.license_id.empty()) {
      drop("missing license");
      continue;
    }
    if (!seen.insert(listing.remote).second) {
      drop("duplicate remote " + listing.remote);
      continue;
    }
    if (listing.name.empty()) listing.name = listing.remote;
    if (auto t = parse_date_or_time(string_or_empty(entry, "last_update"))) listing.last_update = *t;
    listing.is_public = lower(string_or_empty(entry, "visibility")) == "public";
    if (auto c = entry.find("category"); c != entry.end() && c->is_string()) {
      listing.category = parse_category(c->get<std::string>());
    }
    result.listings.push_back(std::move(listing));
  }
  return result;
}

std::set<std::string> default_license_allowlist() {
  return {"0BSD",         "AFL-3.0",      "AGPL-3.0",     "AGPL-3.0-only", "AGPL-3.0-or-later",
          "Apache-2.0",   "Artistic-2.0", "BSD-2-Clause", "BSD-3-Clause",  "BSL-1.0",
          "CC0-1.0",      "ECL-2.0",      "EPL-1.0",      "EPL-2.0",       "EUPL-1.2",
          "GPL-2.0",      "GPL-2.0-only", "GPL-2.0-or-later", "GPL-3.0",   "GPL-3.0-only",
          "GPL-3.0-or-later", "ISC",      "LGPL-2.1",     "LGPL-2.1-only", "LGPL-2.1-or-later",
          "LGPL-3.0",     "LGPL-3.0-only", "LGPL-3.0-or-later", "MIT",     "MIT-0",
          "MPL-2.0",      "MS-PL",        "NCSA",         "OSL-3.0",       "PostgreSQL",
          "Unlicense",    "UPL-1.0",      "Zlib"};
}

std::set<std::string> load_license_allowlist(const json& document) {
  if (!document.is_array()) throw Error(ErrorCode::MalformedDocument, "license list must be a JSON list");
  std::set<std::string> out;
  for (const auto& id : document) out.insert(id.get<std::string>());
  return out;
}

std::vector<RepoListing> filter_eligible(const std::vector<RepoListing>& listings,
                                         const ActivityPolicy& policy, UtcTime now,
                                         const std::set<std::string>& licenses) {
  UtcTime threshold = std::visit(
      [&](const auto& p) -> UtcTime {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, SinceDate>) {
          return p.cutoff;
        } else {
          if (p.days < 1) throw Error(ErrorCode::UsageError, "activity window must be >= 1 day");
          return now.plus_days(-p.days);
        }
      },
      policy);

  std::vector<RepoListing> out;
  for (const auto& l : listings) {
    if (!l.is_public) continue;
    if (!licenses.contains(l.license_id)) continue;
    if (l.last_update < threshold) continue;
    out.push_back(l);
  }
  return out;
}

RepoCategory assign_category(const RepoListing& listing, const std::vector<CategoryRule>& rules) {
  if (rules.empty()) throw Error(ErrorCode::UsageError, "category rules must not be empty");
  const std::string name = lower(listing.name);
  const std::string remote = lower(listing.remote);
  for (const auto& rule : rules) {
    if (rule.pattern.empty() || rule.pattern == ".") return rule.category;
    const std::string pattern = lower(rule.pattern);
    if (name.find(pattern) != std::string::npos || remote.find(pattern) != std::string::npos) {
      return rule.category;
    }
  }
  // Rules are required to end with a catch-all; fall back to the last one.
  return rules.back().category;
}

std::vector<CategoryRule> default_category_rules() {
  return {{"minif2f", RepoCategory::Benchmark},     {"putnam", RepoCategory::Benchmark},
          {"mathlib", RepoCategory::Library},        {"batteries", RepoCategory::Library},
          {"cslib", RepoCategory::Library},          {"verso", RepoCategory::Tooling},
          {"duper", RepoCategory::Tooling},          {"course", RepoCategory::Pedagogical},
          {"tutorial", RepoCategory::Pedagogical},   {"game", RepoCategory::Pedagogical},
          {"glimpse", RepoCategory::Pedagogical},    {".", RepoCategory::Formalization}};
}

std::vector<CategoryRule> load_category_rules(const json& document) {
  if (!document.is_array()) throw Error(ErrorCode::MalformedDocument, "category rules must be a JSON list");
  std::vector<CategoryRule> rules;
  for (const auto& entry : document) {
    auto category = parse_category(entry.value("category", std::string()));
    if (!category) {
      throw Error(ErrorCode::MalformedDocument,
                  "unknown category in rule: " + entry.value("category", std::string()));
    }
    rules.push_back({entry.value("pattern", std::string()), *category});
  }
  if (rules.empty()) throw Error(ErrorCode::MalformedDocument, "category rules must not be empty");
  return rules;
}

json to_json(const RepoListing& l) {
  json j = {{"name", l.name},
            {"remote", l.remote},
            {"license", l.license_id},
            {"last_update", l.last_update.to_string()},
            {"visibility", l.is_public ? "public" : "private"}};
  j["category"] = l.category ? json(std::string(to_string(*l.category))) : json();
  return j;
}

RepoListing listing_from_json(const json& j) {
  RepoListing l;
  l.name = j.value("name", std::string());
  l.remote = j.value("remote", std::string());
  l.license_id = j.value("license", std::string());
  if (auto t = parse_date_or_time(j.value("last_update", std::string()))) l.last_update = *t;
  l.is_public = lower(j.value("visibility", std::string())) == "public";
  if (auto c = j.find("category"); c != j.end() && c->is_string()) {
    l.category = parse_category(c->get<std::string>());
  }
  return l;
}

json to_json(const std::vector<RepoListing>& listings) {
  json out = json::array();
  for (const auto& l : listings) out.push_back(to_json(l));
  return out;
}

std::vector<RepoListing> listings_from_json(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::MalformedDocument, "listings must be a JSON list");
  std::vector<RepoListing> out;
  for (const auto& e : j) out.push_back(listing_from_json(e));
  return out;
}

}  // namespace sorryforge
