#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vdg {

/// Shortest decimal form that round-trips the exact double.
/// Used for every real written to model files, CSV and DOT output so
/// repeated runs are byte-identical.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("malformed real: '" + std::string(s) + "'");
  return v;
}

inline long long parse_int(std::string_view s) {
  long long v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::invalid_argument("malformed integer: '" + std::string(s) + "'");
  return v;
}

}  // namespace vdg
