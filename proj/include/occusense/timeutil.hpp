#pragma once

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace occusense {

constexpr std::int64_t kSecondsPerDay = 86400;

// Days since 1970-01-01 for a proleptic Gregorian civil date.
constexpr std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct CivilDate {
  int year;
  unsigned month;
  unsigned day;
};

constexpr CivilDate civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return {static_cast<int>(y + (m <= 2)), m, d};
}

// UTC day number (days since epoch) containing the given timestamp.
constexpr std::int64_t utc_day(std::int64_t epoch_seconds) {
  std::int64_t d = epoch_seconds / kSecondsPerDay;
  if (epoch_seconds % kSecondsPerDay < 0) --d;
  return d;
}

// Seconds past UTC midnight for the given timestamp.
constexpr int seconds_of_day(std::int64_t epoch_seconds) {
  return static_cast<int>(epoch_seconds - utc_day(epoch_seconds) * kSecondsPerDay);
}

// Parses "YYYY-MM-DDTHH:MM:SS[.fff][Z]" as UTC; fractional seconds are
// truncated. Returns nothing on any malformed input.
inline std::optional<std::int64_t> parse_iso8601_utc(std::string_view text) {
  int y = 0;
  unsigned mo = 0, da = 0, hh = 0, mi = 0, ss = 0;
  int consumed = 0;
  std::string buf(text);
  if (std::sscanf(buf.c_str(), "%4d-%2u-%2uT%2u:%2u:%2u%n", &y, &mo, &da, &hh,
                  &mi, &ss, &consumed) != 6 ||
      consumed != 19) {
    return std::nullopt;
  }
  std::string_view rest = text.substr(19);
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    if (rest.empty() || rest.front() < '0' || rest.front() > '9') return std::nullopt;
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  if (!rest.empty()) {
    if (rest != "Z") return std::nullopt;
  }
  if (mo < 1 || mo > 12 || da < 1 || da > 31 || hh > 23 || mi > 59 || ss > 60) {
    return std::nullopt;
  }
  return days_from_civil(y, mo, da) * kSecondsPerDay + hh * 3600 + mi * 60 + ss;
}

inline std::string format_iso8601_utc(std::int64_t epoch_seconds) {
  const CivilDate date = civil_from_days(utc_day(epoch_seconds));
  const unsigned sod = static_cast<unsigned>(seconds_of_day(epoch_seconds));
  char out[40];
  std::snprintf(out, sizeof out, "%04d-%02u-%02uT%02u:%02u:%02uZ", date.year,
                date.month, date.day, sod / 3600, (sod / 60) % 60, sod % 60);
  return out;
}

}  // namespace occusense
