#include "lagcast/month.hpp"

#include <charconv>
#include <cstdio>

#include "lagcast/error.hpp"

namespace lagcast {

std::string MonthIndex::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

MonthIndex MonthIndex::parse(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) fail(ErrorKind::ParseError, "expected YYYY-MM, got '" + std::string(text) + "'");
  int y = 0;
  int m = 0;
  const auto ys = text.substr(0, dash);
  const auto ms = text.substr(dash + 1);
  const auto ry = std::from_chars(ys.data(), ys.data() + ys.size(), y);
  const auto rm = std::from_chars(ms.data(), ms.data() + ms.size(), m);
  if (ry.ec != std::errc{} || ry.ptr != ys.data() + ys.size() || rm.ec != std::errc{} ||
      rm.ptr != ms.data() + ms.size()) {
    fail(ErrorKind::ParseError, "expected YYYY-MM, got '" + std::string(text) + "'");
  }
  if (y < 1900 || m < 1 || m > 12) fail(ErrorKind::ParseError, "month out of range: '" + std::string(text) + "'");
  return MonthIndex{y, m};
}

MonthIndex MonthIndex::checked(int year, int month) {
  if (year < 1900 || month < 1 || month > 12) {
    fail(ErrorKind::InvalidParams,
         "invalid month " + std::to_string(year) + "-" + std::to_string(month));
  }
  return MonthIndex{year, month};
}

}  // namespace lagcast
