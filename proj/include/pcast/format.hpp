#ifndef PCAST_FORMAT_HPP
#define PCAST_FORMAT_HPP

#include <charconv>
#include <string>

namespace pcast {

// Canonical number formatting for all CSV/JSON output: shortest string that
// round-trips to the same double, integers without a decimal point. Keeps
// rerun outputs byte-identical.
inline std::string format_number(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace pcast

#endif
