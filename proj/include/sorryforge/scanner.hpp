#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sorryforge/core_model.hpp"

namespace sorryforge {

struct ScanHit {
  SourceLocation location;  // path left empty; the caller knows the file
  std::string token;

  bool operator==(const ScanHit&) const = default;
};

/// Positions of `sorry` used as a standalone term. Comments (line and nested
/// block), string/char literals and escaped identifiers are skipped, and
/// `sorry` embedded in a longer identifier (`sorryAx`, `mysorry`, `Foo.sorry`,
/// `sorry'`) does not count. Columns count code points.
std::vector<ScanHit> scan_for_sorries(std::string_view source);

/// Every identifier in code position, dotted names as one token. Keywords
/// such as `theorem` are included.
std::vector<ScanHit> scan_identifiers(std::string_view source);

}  // namespace sorryforge
