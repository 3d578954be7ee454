#include "airq/time.hpp"

#include <cctype>
#include <cstdio>

#include "airq/error.hpp"

namespace airq {
namespace {

using namespace std::chrono;

[[noreturn]] void bad(std::string_view text, std::string_view why) {
  fail(ErrorCode::kParse,
       "invalid ISO-8601 timestamp '" + std::string(text) + "': " + std::string(why));
}

int digits(std::string_view text, std::size_t& pos, int count) {
  if (pos + count > text.size()) bad(text, "truncated");
  int v = 0;
  for (int i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (!std::isdigit(static_cast<unsigned char>(c))) bad(text, "expected digit");
    v = v * 10 + (c - '0');
  }
  pos += count;
  return v;
}

void expect(std::string_view text, std::size_t& pos, char c) {
  if (pos >= text.size() || text[pos] != c) bad(text, std::string("expected '") + c + "'");
  ++pos;
}

}  // namespace

std::string format_iso8601(Timestamp ts) {
  const auto day = floor<days>(ts);
  const year_month_day ymd{day};
  const hh_mm_ss hms{ts - day};
  char buf[40];
  const auto ms = hms.subseconds().count();
  if (ms == 0) {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(hms.hours().count()),
                  static_cast<long long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()));
  } else {
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()),
                  static_cast<long long>(hms.hours().count()),
                  static_cast<long long>(hms.minutes().count()),
                  static_cast<long long>(hms.seconds().count()),
                  static_cast<long long>(ms));
  }
  return buf;
}

Timestamp parse_iso8601(std::string_view text) {
  std::size_t pos = 0;
  const int y = digits(text, pos, 4);
  expect(text, pos, '-');
  const int mo = digits(text, pos, 2);
  expect(text, pos, '-');
  const int d = digits(text, pos, 2);
  if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' '))
    bad(text, "expected 'T'");
  ++pos;
  const int h = digits(text, pos, 2);
  expect(text, pos, ':');
  const int mi = digits(text, pos, 2);
  expect(text, pos, ':');
  const int s = digits(text, pos, 2);

  long long ms = 0;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    int n = 0;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      if (n < 3) ms = ms * 10 + (text[pos] - '0');
      ++n;
      ++pos;
    }
    if (n == 0) bad(text, "empty fraction");
    for (int i = n; i < 3; ++i) ms *= 10;
  }

  long long offset_min = 0;
  if (pos >= text.size()) bad(text, "missing UTC designator");
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    const int sign = text[pos] == '-' ? -1 : 1;
    ++pos;
    const int oh = digits(text, pos, 2);
    expect(text, pos, ':');
    const int om = digits(text, pos, 2);
    offset_min = sign * (oh * 60 + om);
  } else {
    bad(text, "unexpected character");
  }
  if (pos != text.size()) bad(text, "trailing characters");

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)},
                           day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) bad(text, "invalid calendar date");
  if (h > 23 || mi > 59 || s > 60) bad(text, "invalid time of day");

  const auto tp = sys_days{ymd} + hours{h} + minutes{mi} + seconds{s} + milliseconds{ms} -
                  minutes{offset_min};
  return time_point_cast<milliseconds>(tp);
}

Timestamp floor_hour(Timestamp ts) { return floor<hours>(ts); }

Timestamp now_utc() { return time_point_cast<milliseconds>(system_clock::now()); }

}  // namespace airq
