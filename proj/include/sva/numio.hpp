#pragma once

#include <charconv>
#include <string>
#include <string_view>

#include "sva/errors.hpp"

namespace sva {

// Shortest round-trip decimal formatting. parse_double(format_double(x)) == x
// bit for bit, and re-formatting a parsed file reproduces it byte for byte.
inline std::string format_double(double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, ptr);
}

inline double parse_double(std::string_view text, const char* what = "number") {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return value;
}

inline long parse_long(std::string_view text, const char* what = "integer") {
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError(std::string("invalid ") + what + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace sva
