#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace sorryforge {

// A UTC instant with one-second resolution, serialized as RFC 3339
// ("2025-06-01T12:00:00Z").
class UtcTime {
 public:
  using clock_time = std::chrono::sys_seconds;

  constexpr UtcTime() = default;
  constexpr explicit UtcTime(clock_time t) : t_(t) {}

  static UtcTime from_unix(std::int64_t seconds);
  static UtcTime now();

  // Accepts "Z" or a numeric "+hh:mm" / "-hh:mm" offset and optional
  // fractional seconds (truncated). Returns nullopt on malformed input.
  static std::optional<UtcTime> parse(std::string_view text);

  std::string to_string() const;
  std::int64_t unix_seconds() const { return t_.time_since_epoch().count(); }
  clock_time time_point() const { return t_; }

  UtcTime plus_days(int days) const {
    return UtcTime(t_ + std::chrono::days(days));
  }

  friend constexpr auto operator<=>(const UtcTime&, const UtcTime&) = default;
  friend constexpr bool operator==(const UtcTime&, const UtcTime&) = default;

 private:
  clock_time t_{};
};

}  // namespace sorryforge
