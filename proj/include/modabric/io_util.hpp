#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "modabric/error.hpp"

namespace modabric {

// ---------------------------------------------------------------------------
// ISO-8601 UTC timestamps. Accepted forms: "YYYY-MM-DDTHH:MM:SS" with an
// optional trailing 'Z', or a bare date "YYYY-MM-DD" (midnight). Stored as
// seconds since the Unix epoch.
// ---------------------------------------------------------------------------

namespace detail {

// Howard Hinnant's civil-date algorithm.
inline int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

inline void civil_from_days(int64_t z, int& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int yr = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y = yr + (m <= 2);
}

inline bool days_in_month_ok(int y, int m, int d) {
  static const int lens[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m < 1 || m > 12 || d < 1) return false;
  int len = lens[m - 1];
  if (m == 2 && ((y % 4 == 0 && y % 100 != 0) || y % 400 == 0)) len = 29;
  return d <= len;
}

}  // namespace detail

inline int64_t parse_iso8601_utc(const std::string& s) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
  char t = 0, z = 0;
  int n = std::sscanf(s.c_str(), "%4d-%2d-%2d%c%2d:%2d:%2d%c", &y, &mo, &d, &t, &h, &mi, &sec, &z);
  if (n == 3 && s.size() == 10) {
    // bare date
  } else if ((n == 7 || n == 8) && t == 'T' && (n == 7 ? s.size() == 19 : (z == 'Z' && s.size() == 20))) {
    if (h > 23 || mi > 59 || sec > 60) throw ParseError("invalid time of day in '" + s + "'");
  } else {
    throw ParseError("invalid ISO-8601 UTC timestamp '" + s + "'");
  }
  if (!detail::days_in_month_ok(y, mo, d)) throw ParseError("invalid calendar date in '" + s + "'");
  return detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
}

inline std::string format_iso8601_utc(int64_t ts) {
  int64_t days = ts / 86400;
  int64_t rem = ts % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  int y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", y, m, d,
                static_cast<long long>(rem / 3600), static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

namespace detail {

template <typename T>
void write_pod(std::ostream& os, T x) {
  os.write(reinterpret_cast<const char*>(&x), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& path) {
  T x{};
  if (!is.read(reinterpret_cast<char*>(&x), sizeof(T)))
    throw ParseError(path + ": truncated binary file");
  return x;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Small file/CSV helpers. CSV here is the strict artifact dialect: comma
// separated, no quoting, no embedded separators.
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw ParseError("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw ParseError("write failure on '" + path + "'");
}

// Shortest-round-trip-ish doubles for CSV output; %.17g is exact, %.*g below
// keeps files readable where bit exactness is not required.
inline std::string fmt_double(double x, int precision = 17) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, x);
  return buf;
}

}  // namespace modabric
