#include "sorryforge/scanner.hpp"

#include "sorryforge/lean_syntax.hpp"

namespace sorryforge {

std::vector<ScanHit> scan_identifiers(std::string_view source) {
  using lean::Region;
  const std::u32string s = lean::decode_utf8(source);
  const std::vector<Region> region = lean::classify(s);
  const std::size_t n = s.size();
  std::vector<ScanHit> hits;
  int line = 1;
  int column = 0;
  std::size_t i = 0;

  auto advance_to = [&](std::size_t target) {
    for (; i < target; ++i) {
      if (s[i] == '\n') {
        ++line;
        column = 0;
      } else {
        ++column;
      }
    }
  };

  while (i < n) {
    const char32_t prev = i > 0 ? s[i - 1] : 0;
    const bool starts_identifier = region[i] == Region::Code && lean::is_id_first(s[i]) &&
                                   !lean::is_id_rest(prev) && prev != '.';
    if (!starts_identifier) {
      advance_to(i + 1);
      continue;
    }

    std::size_t j = i;
    while (j < n && region[j] == Region::Code && lean::is_id_rest(s[j])) ++j;
    // Dotted names (Foo.sorry, sorry.foo) are a single identifier.
    while (j + 1 < n && s[j] == '.' && region[j + 1] == Region::Code && lean::is_id_first(s[j + 1])) {
      ++j;
      while (j < n && region[j] == Region::Code && lean::is_id_rest(s[j])) ++j;
    }

    ScanHit hit;
    hit.token = lean::encode_utf8(std::u32string_view(s).substr(i, j - i));
    hit.location.start_line = line;
    hit.location.start_column = column;
    hit.location.end_line = line;
    hit.location.end_column = column + static_cast<int>(j - i);
    hits.push_back(std::move(hit));
    advance_to(j);
  }
  return hits;
}

std::vector<ScanHit> scan_for_sorries(std::string_view source) {
  // Dotted names never equal the bare token, so Foo.sorry and sorry.foo drop out here.
  std::vector<ScanHit> hits = scan_identifiers(source);
  std::erase_if(hits, [](const ScanHit& h) { return h.token != "sorry"; });
  return hits;
}

}  // namespace sorryforge
