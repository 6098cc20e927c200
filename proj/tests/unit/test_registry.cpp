#include <doctest.h>

#include "sorryforge/errors.hpp"
#include "sorryforge/repo_registry.hpp"
#include "support.hpp"

using namespace sorryforge;

namespace {

json sample_registry() {
  return json::parse(R"([
    {"name": "mathlib4", "remote": "https://github.com/leanprover-community/mathlib4.git",
     "license": "Apache-2.0", "last_update": "2025-12-20T08:00:00Z", "visibility": "public"},
    {"name": "RealAnalysisGame", "remote": "https://github.com/AlexKontorovich/RealAnalysisGame.git",
     "license": "Apache-2.0", "last_update": "2025-11-01", "visibility": "public"},
    {"name": "FLT", "remote": "https://github.com/ImperialCollegeLondon/FLT.git",
     "license": "Apache-2.0", "last_update": "2025-12-30T10:00:00Z", "visibility": "public"},
    {"name": "private-thing", "remote": "https://example.org/private.git",
     "license": "MIT", "last_update": "2025-12-30T10:00:00Z", "visibility": "private"},
    {"name": "stale", "remote": "https://example.org/stale.git",
     "license": "MIT", "last_update": "2024-01-01T00:00:00Z", "visibility": "public"},
    {"name": "no-license", "remote": "https://example.org/nolicense.git",
     "last_update": "2025-12-30T10:00:00Z", "visibility": "public"},
    {"name": "proprietary", "remote": "https://example.org/prop.git",
     "license": "LicenseRef-Proprietary", "last_update": "2025-12-30T10:00:00Z", "visibility": "public"},
    {"name": "mathlib4 again", "remote": "https://github.com/leanprover-community/mathlib4.git",
     "license": "Apache-2.0", "last_update": "2025-12-20T08:00:00Z", "visibility": "public"},
    {"name": "no-remote", "license": "MIT"}
  ])");
}

}  // namespace

TEST_CASE("ingest drops incomplete and duplicate entries") {
  auto r = ingest_registry(sample_registry());
  CHECK(r.listings.size() == 6);
  CHECK(r.dropped == 3);
  REQUIRE(r.drop_reasons.size() == 3);
  CHECK(r.drop_reasons[0].find("missing license") != std::string::npos);
  CHECK(r.drop_reasons[1].find("duplicate remote") != std::string::npos);
  CHECK(r.drop_reasons[2].find("missing remote") != std::string::npos);
  CHECK(r.listings[1].last_update == *UtcTime::parse("2025-11-01T00:00:00Z"));
  CHECK(r.listings[3].is_public == false);
}

TEST_CASE("ingest rejects non-list documents") {
  try {
    ingest_registry(json::object());
    FAIL("expected MalformedDocument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedDocument);
  }
}

TEST_CASE("filter by rolling window and since-date") {
  auto listings = ingest_registry(sample_registry()).listings;
  UtcTime now = *UtcTime::parse("2026-01-01T00:00:00Z");

  auto names = [](const std::vector<RepoListing>& ls) {
    std::vector<std::string> out;
    for (const auto& l : ls) out.push_back(l.name);
    return out;
  };

  CHECK(names(filter_eligible(listings, WithinWindow{90}, now)) ==
        std::vector<std::string>{"mathlib4", "RealAnalysisGame", "FLT"});
  CHECK(names(filter_eligible(listings, WithinWindow{30}, now)) == std::vector<std::string>{"mathlib4", "FLT"});
  CHECK(names(filter_eligible(listings, SinceDate{*UtcTime::parse("2025-12-25T00:00:00Z")}, now)) ==
        std::vector<std::string>{"FLT"});
  // The threshold is inclusive.
  CHECK(names(filter_eligible(listings, SinceDate{*UtcTime::parse("2025-12-30T10:00:00Z")}, now)) ==
        std::vector<std::string>{"FLT"});

  try {
    filter_eligible(listings, WithinWindow{0}, now);
    FAIL("expected UsageError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UsageError);
  }
}

TEST_CASE("custom license allow-list") {
  auto listings = ingest_registry(sample_registry()).listings;
  UtcTime now = *UtcTime::parse("2026-01-01T00:00:00Z");
  auto only_proprietary = load_license_allowlist(json::array({"LicenseRef-Proprietary"}));
  auto out = filter_eligible(listings, WithinWindow{90}, now, only_proprietary);
  REQUIRE(out.size() == 1);
  CHECK(out[0].name == "proprietary");
}

TEST_CASE("policy parsing") {
  CHECK(std::holds_alternative<WithinWindow>(*parse_policy("window:90")));
  CHECK(std::get<WithinWindow>(*parse_policy("window:7")).days == 7);
  CHECK(std::get<SinceDate>(*parse_policy("since:2025-01-01")).cutoff == *UtcTime::parse("2025-01-01T00:00:00Z"));
  CHECK_FALSE(parse_policy("window:0"));
  CHECK_FALSE(parse_policy("window:abc"));
  CHECK_FALSE(parse_policy("forever"));
}

TEST_CASE("category assignment: first match wins, catch-all last") {
  auto rules = default_category_rules();
  auto cat = [&](const std::string& name, const std::string& remote) {
    RepoListing l;
    l.name = name;
    l.remote = remote;
    return assign_category(l, rules);
  };
  CHECK(cat("mathlib4", "https://github.com/leanprover-community/mathlib4.git") == RepoCategory::Library);
  CHECK(cat("miniF2F", "https://github.com/x/miniF2F.git") == RepoCategory::Benchmark);
  CHECK(cat("RealAnalysisGame", "https://github.com/a/RealAnalysisGame.git") == RepoCategory::Pedagogical);
  CHECK(cat("verso", "https://github.com/leanprover/verso.git") == RepoCategory::Tooling);
  CHECK(cat("FLT", "https://github.com/ImperialCollegeLondon/FLT.git") == RepoCategory::Formalization);

  auto custom = load_category_rules(json::parse(R"([{"pattern":"flt","category":"Library"},
                                                    {"pattern":".","category":"Tooling"}])"));
  RepoListing l;
  l.name = "FLT";
  CHECK(assign_category(l, custom) == RepoCategory::Library);
  l.name = "other";
  CHECK(assign_category(l, custom) == RepoCategory::Tooling);
  CHECK_THROWS(assign_category(l, {}));
}

TEST_CASE("listing JSON round-trip") {
  auto listings = ingest_registry(sample_registry()).listings;
  listings[0].category = RepoCategory::Library;
  CHECK(listings_from_json(to_json(listings)) == listings);
}
