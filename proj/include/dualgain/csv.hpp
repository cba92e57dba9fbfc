#pragma once

#include <charconv>
#include <string>

namespace dualgain {

// Locale-independent decimal formatting with 17 significant digits, so a
// round trip through the CSV is exact and byte-stable across runs.
inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                 std::chars_format::scientific, 16);
  return std::string(buf, ptr);
}

}  // namespace dualgain
