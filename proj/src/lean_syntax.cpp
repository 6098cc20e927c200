#include "sorryforge/lean_syntax.hpp"

namespace sorryforge::lean {

bool is_letter_like(char32_t c) {
  return (0x3b1 <= c && c <= 0x3c9 && c != 0x3bb) ||                 // lower greek except lambda
         (0x391 <= c && c <= 0x3a9 && c != 0x3a0 && c != 0x3a3) ||  // upper greek except Pi, Sigma
         (0x3ca <= c && c <= 0x3fb) ||                               // coptic
         (0x1f00 <= c && c <= 0x1ffe) ||                             // polytonic greek
         (0x2100 <= c && c <= 0x214f) ||                             // letterlike block
         (0x1d49c <= c && c <= 0x1d59f);                             // script, double-struck, fraktur
}

bool is_subscript_alnum(char32_t c) {
  return (0x2080 <= c && c <= 0x2089) || (0x2090 <= c && c <= 0x209c) ||
         (0x1d62 <= c && c <= 0x1d6a);
}

bool is_id_first(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || is_letter_like(c);
}

bool is_id_rest(char32_t c) {
  return is_id_first(c) || (c >= '0' && c <= '9') || c == '\'' || c == '!' || c == '?' ||
         is_subscript_alnum(c);
}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    auto b0 = static_cast<unsigned char>(text[i]);
    char32_t cp = 0xfffd;
    std::size_t len = 1;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 >> 5) == 0x6) {
      len = 2;
      cp = b0 & 0x1f;
    } else if ((b0 >> 4) == 0xe) {
      len = 3;
      cp = b0 & 0x0f;
    } else if ((b0 >> 3) == 0x1e) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      len = 0;
    }
    if (len == 0 || i + len > text.size()) {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    bool ok = true;
    for (std::size_t k = 1; k < len; ++k) {
      auto b = static_cast<unsigned char>(text[i + k]);
      if ((b >> 6) != 0x2) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3f);
    }
    if (!ok) {
      out.push_back(0xfffd);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t c : text) {
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
      out.push_back(static_cast<char>(0xc0 | (c >> 6)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else if (c < 0x10000) {
      out.push_back(static_cast<char>(0xe0 | (c >> 12)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    } else {
      out.push_back(static_cast<char>(0xf0 | (c >> 18)));
      out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3f)));
      out.push_back(static_cast<char>(0x80 | (c & 0x3f)));
    }
  }
  return out;
}

std::vector<Region> classify(std::u32string_view s) {
  const std::size_t n = s.size();
  std::vector<Region> region(n, Region::Code);
  auto at = [&](std::size_t k) -> char32_t { return k < n ? s[k] : 0; };
  auto mark = [&](std::size_t from, std::size_t to, Region r) {
    for (std::size_t k = from; k < to && k < n; ++k) region[k] = r;
  };

  std::size_t i = 0;
  while (i < n) {
    const char32_t c = s[i];
    const char32_t prev = i > 0 ? s[i - 1] : 0;

    if (c == '-' && at(i + 1) == '-') {
      std::size_t j = i;
      while (j < n && s[j] != '\n') ++j;
      mark(i, j, Region::Comment);
      i = j;
    } else if (c == '/' && at(i + 1) == '-') {
      std::size_t j = i + 2;
      int depth = 1;
      while (j < n && depth > 0) {
        if (s[j] == '/' && at(j + 1) == '-') {
          ++depth;
          j += 2;
        } else if (s[j] == '-' && at(j + 1) == '/') {
          --depth;
          j += 2;
        } else {
          ++j;
        }
      }
      mark(i, j, Region::Comment);
      i = j;
    } else if (c == '"') {
      std::size_t j = i + 1;
      while (j < n) {
        if (s[j] == '\\') {
          j += 2;
        } else if (s[j] == '"') {
          ++j;
          break;
        } else {
          ++j;
        }
      }
      mark(i, j, Region::String);
      i = std::min(j, n);
    } else if (c == 'r' && !is_id_rest(prev) && prev != '.' &&
               (at(i + 1) == '"' || at(i + 1) == '#')) {
      std::size_t hashes = 0;
      while (at(i + 1 + hashes) == '#') ++hashes;
      if (at(i + 1 + hashes) != '"') {
        ++i;
        continue;
      }
      std::size_t j = i + 2 + hashes;
      while (j < n) {
        if (s[j] == '"') {
          std::size_t k = 0;
          while (k < hashes && at(j + 1 + k) == '#') ++k;
          if (k == hashes) {
            j += 1 + hashes;
            break;
          }
        }
        ++j;
      }
      mark(i, j, Region::String);
      i = std::min(j, n);
    } else if (c == '\'' && !is_id_rest(prev)) {
      // Char literal: 'x' or an escape such as '\'' / '\x41' / '\u{2200}'.
      std::size_t end = 0;
      if (at(i + 1) == '\\') {
        for (std::size_t j = i + 3; j < n && j < i + 12 && s[j] != '\n'; ++j) {
          if (s[j] == '\'') {
            end = j + 1;
            break;
          }
        }
      } else if (at(i + 1) != 0 && at(i + 1) != '\n' && at(i + 2) == '\'') {
        end = i + 3;
      }
      if (end != 0) {
        mark(i, end, Region::String);
        i = end;
      } else {
        ++i;
      }
    } else if (c == U'«') {  // «escaped identifier»
      std::size_t j = i + 1;
      while (j < n && s[j] != U'»' && s[j] != '\n') ++j;
      if (j < n && s[j] == U'»') ++j;
      mark(i, j, Region::String);
      i = j;
    } else {
      ++i;
    }
  }
  return region;
}

}  // namespace sorryforge::lean
