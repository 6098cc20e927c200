#include <doctest.h>

#include <random>

#include "sorryforge/fs_util.hpp"
#include "sorryforge/lean_syntax.hpp"
#include "sorryforge/scanner.hpp"
#include "support.hpp"

using namespace sorryforge;

namespace {

std::vector<std::array<int, 4>> spans(const std::vector<ScanHit>& hits) {
  std::vector<std::array<int, 4>> out;
  for (const auto& h : hits) {
    out.push_back({h.location.start_line, h.location.start_column, h.location.end_line, h.location.end_column});
  }
  return out;
}

}  // namespace

TEST_CASE("scanner matches the hand-labelled corpus") {
  auto dir = testing::fixtures() / "scanner";
  json golden = json::parse(read_file(dir / "golden.json"));
  REQUIRE(golden.size() == 20);
  for (const auto& [name, expected] : golden.items()) {
    CAPTURE(name);
    auto got = spans(scan_for_sorries(read_file(dir / name)));
    std::vector<std::array<int, 4>> want;
    for (const auto& s : expected) want.push_back({s[0], s[1], s[2], s[3]});
    CHECK(got == want);
  }
}

TEST_CASE("basic positions") {
  auto hits = scan_for_sorries("theorem t : True := by sorry\n");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].token == "sorry");
  CHECK(hits[0].location.start_line == 1);
  CHECK(hits[0].location.start_column == 23);
  CHECK(hits[0].location.end_column == 28);
}

TEST_CASE("columns count code points, not bytes") {
  auto hits = scan_for_sorries("theorem α_β : ∀ n : ℕ, n = n := sorry");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].location.start_column == 32);
}

TEST_CASE("masked forms") {
  CHECK(scan_for_sorries("-- sorry").empty());
  CHECK(scan_for_sorries("/- /- sorry -/ sorry -/").empty());
  CHECK(scan_for_sorries("def s := \"sorry\"").empty());
  CHECK(scan_for_sorries("def s := r#\"sorry\"#").empty());
  CHECK(scan_for_sorries("def «sorry» := 1").empty());
  CHECK(scan_for_sorries("sorryAx mysorry Foo.sorry sorry' sorry₁").empty());
  CHECK(scan_for_sorries("/-- doc sorry -/ example : True := sorry").size() == 1);
}

TEST_CASE("identifier scan keeps dotted names whole") {
  auto ids = scan_identifiers("theorem Foo.bar : Nat.succ 0 = 1 := rfl -- ignored");
  std::vector<std::string> tokens;
  for (const auto& h : ids) tokens.push_back(h.token);
  CHECK(tokens == std::vector<std::string>{"theorem", "Foo.bar", "Nat.succ", "rfl"});
}

// Differential check against an oracle that knows, by construction, which
// generated fragments are standalone `sorry` terms.
TEST_CASE("randomized differential against a construction oracle") {
  struct Piece {
    std::string text;
    bool is_term;
  };
  const std::vector<Piece> pieces = {
      {"sorry", true},          {"sorryAx", false},      {"x.sorry", false},   {"(sorry)", false},
      {"-- sorry\n", false},    {"/- sorry -/", false},  {"\"sorry\"", false}, {"by", false},
      {"⊢", false},             {"\n", false},           {"«sorry»", false},   {"/- a /- sorry -/ b -/", false},
      {"'s'", false},           {"mysorry", false},      {"·", false},         {"ℕ", false},
  };
  std::mt19937 rng(1234);
  for (int round = 0; round < 300; ++round) {
    std::string src;
    std::vector<std::pair<int, int>> expected;
    int line = 1, col = 0;
    auto advance = [&](const std::string& s) {
      for (char32_t c : lean::decode_utf8(s)) {
        if (c == U'\n') {
          ++line;
          col = 0;
        } else {
          ++col;
        }
      }
      src += s;
    };
    int n = static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      const Piece& p = pieces[rng() % pieces.size()];
      if (p.is_term) expected.emplace_back(line, col);
      if (p.text == "(sorry)") expected.emplace_back(line, col + 1);
      advance(p.text);
      advance(" ");
    }
    auto hits = scan_for_sorries(src);
    std::vector<std::pair<int, int>> got;
    for (const auto& h : hits) got.emplace_back(h.location.start_line, h.location.start_column);
    CAPTURE(src);
    CHECK(got == expected);
  }
}

TEST_CASE("CRLF line endings") {
  auto hits = scan_for_sorries("example : True := by\r\n  sorry\r\n");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].location.start_line == 2);
  CHECK(hits[0].location.start_column == 2);
}
