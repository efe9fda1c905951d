#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace flockscope {

// Timestamps are integer seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;
using Duration = std::int64_t;  // seconds

constexpr Duration kSecondsPerDay = 86400;
constexpr Duration kSecondsPerHour = 3600;

constexpr Duration days(std::int64_t n) { return n * kSecondsPerDay; }
constexpr Duration hours(std::int64_t n) { return n * kSecondsPerHour; }

namespace detail {

// Howard Hinnant's civil-date algorithms; valid far beyond any plausible range here.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t year;
  unsigned month, day;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {y + (m <= 2), m, d};
}

}  // namespace detail

constexpr Timestamp make_timestamp(std::int64_t year, unsigned month, unsigned day,
                                   unsigned hour = 0, unsigned minute = 0,
                                   unsigned second = 0) {
  return detail::days_from_civil(year, month, day) * kSecondsPerDay +
         hour * 3600 + minute * 60 + second;
}

constexpr std::int64_t utc_year(Timestamp t) {
  std::int64_t d = t / kSecondsPerDay;
  if (t % kSecondsPerDay < 0) --d;
  return detail::civil_from_days(d).year;
}

// Accepts "YYYY-MM-DDThh:mm:ss" with optional fractional seconds (truncated)
// and a "Z" or "+hh:mm"/"-hh:mm" offset. Returns nothing on malformed input.
inline std::optional<Timestamp> parse_rfc3339(std::string_view s) {
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  auto num = [&](size_t pos, size_t len) -> std::optional<std::int64_t> {
    if (pos + len > s.size()) return std::nullopt;
    std::int64_t v = 0;
    for (size_t i = pos; i < pos + len; ++i) {
      if (!digit(s[i])) return std::nullopt;
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  if (s.size() < 20) return std::nullopt;
  auto yr = num(0, 4), mo = num(5, 2), dy = num(8, 2);
  auto hh = num(11, 2), mi = num(14, 2), ss = num(17, 2);
  if (!yr || !mo || !dy || !hh || !mi || !ss) return std::nullopt;
  if (s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != 't' && s[10] != ' ') ||
      s[13] != ':' || s[16] != ':')
    return std::nullopt;
  if (*mo < 1 || *mo > 12 || *dy < 1 || *hh > 23 || *mi > 59 || *ss > 60)
    return std::nullopt;
  static constexpr int month_days[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = *yr % 4 == 0 && (*yr % 100 != 0 || *yr % 400 == 0);
  if (*dy > (*mo == 2 && leap ? 29 : month_days[*mo - 1])) return std::nullopt;

  size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    size_t start = pos;
    while (pos < s.size() && digit(s[pos])) ++pos;
    if (pos == start) return std::nullopt;
  }
  if (pos >= s.size()) return std::nullopt;

  std::int64_t offset = 0;
  char c = s[pos];
  if (c == 'Z' || c == 'z') {
    if (pos + 1 != s.size()) return std::nullopt;
  } else if (c == '+' || c == '-') {
    auto oh = num(pos + 1, 2), om = num(pos + 4, 2);
    if (!oh || !om || pos + 3 >= s.size() || s[pos + 3] != ':' || pos + 6 != s.size())
      return std::nullopt;
    if (*oh > 23 || *om > 59) return std::nullopt;
    offset = (*oh * 60 + *om) * 60;
    if (c == '-') offset = -offset;
  } else {
    return std::nullopt;
  }

  Timestamp t = make_timestamp(*yr, static_cast<unsigned>(*mo),
                               static_cast<unsigned>(*dy), static_cast<unsigned>(*hh),
                               static_cast<unsigned>(*mi),
                               static_cast<unsigned>(*ss == 60 ? 59 : *ss));
  if (*ss == 60) t += 1;  // fold leap second forward
  return t - offset;
}

inline std::string format_rfc3339(Timestamp t) {
  std::int64_t d = t / kSecondsPerDay;
  std::int64_t sod = t % kSecondsPerDay;
  if (sod < 0) {
    sod += kSecondsPerDay;
    --d;
  }
  const auto c = detail::civil_from_days(d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(c.year), c.month, c.day,
                static_cast<long long>(sod / 3600), static_cast<long long>(sod / 60 % 60),
                static_cast<long long>(sod % 60));
  return buf;
}

}  // namespace flockscope
