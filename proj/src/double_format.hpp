#pragma once

#include <charconv>
#include <string>
#include <system_error>

// Locale-independent double formatting (printf %g semantics) used for CSV
// and report output.

namespace powalloc::detail {

inline std::string format_double(double value, int significant_digits = 9) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general,
                                 significant_digits);
  if (res.ec != std::errc{}) {
    return "nan";
  }
  return std::string(buf, res.ptr);
}

}  // namespace powalloc::detail
