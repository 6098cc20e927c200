#pragma once

#include <string>
#include <string_view>

namespace sorryforge {

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

bool is_lower_hex(std::string_view text, std::size_t length);

}  // namespace sorryforge
