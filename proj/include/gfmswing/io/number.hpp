#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace gfmswing {

// Shortest decimal text that round-trips to the same double; locale-free and
// therefore byte-stable across runs.
inline std::string fmt_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  if (res.ec != std::errc()) return "nan";
  return std::string(buf, res.ptr);
}

}  // namespace gfmswing
