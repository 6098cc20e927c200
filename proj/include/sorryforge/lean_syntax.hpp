#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sorryforge::lean {

// Identifier character classes as defined by the Lean 4 lexer.
bool is_letter_like(char32_t c);
bool is_subscript_alnum(char32_t c);
bool is_id_first(char32_t c);
bool is_id_rest(char32_t c);

std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);

// Classification of every code point in a source file.
enum class Region : unsigned char { Code, Comment, String };

/// One entry per code point of `source`: whether it sits in code, inside a
/// (possibly nested) comment, or inside a quoted form (string, raw string,
/// char literal, «escaped identifier»). Delimiters belong to the region they
/// open or close.
std::vector<Region> classify(std::u32string_view source);

}  // namespace sorryforge::lean
