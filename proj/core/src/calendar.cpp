#include "stcpd/calendar.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace stcpd {

using namespace std::chrono;

std::optional<Date> parse_date(const std::string& text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  const char* s = text.data();
  if (std::from_chars(s, s + 4, y).ptr != s + 4) return std::nullopt;
  if (std::from_chars(s + 5, s + 7, m).ptr != s + 7) return std::nullopt;
  if (std::from_chars(s + 8, s + 10, d).ptr != s + 10) return std::nullopt;
  const Date date{year{y}, month{m}, day{d}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

TimeIndex::TimeIndex(Date start, std::size_t length, Calendar calendar) : calendar_(calendar) {
  if (!start.ok()) throw std::invalid_argument("TimeIndex: invalid start date");
  const auto is_leap_day = [](const Date& d) {
    return d.month() == February && d.day() == day{29};
  };
  if (calendar == Calendar::NoLeap && is_leap_day(start)) {
    throw std::invalid_argument("TimeIndex: February 29 does not exist in a no-leap calendar");
  }
  dates_.reserve(length);
  sys_days cur{start};
  while (dates_.size() < length) {
    const Date d{cur};
    cur += days{1};
    if (calendar == Calendar::NoLeap && is_leap_day(d)) continue;
    dates_.push_back(d);
  }
}

std::optional<std::size_t> TimeIndex::find(const Date& d) const {
  const auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - dates_.begin());
}

const char* to_string(Season s) noexcept {
  switch (s) {
    case Season::Winter: return "winter";
    case Season::Spring: return "spring";
    case Season::Summer: return "summer";
    case Season::Fall: return "fall";
  }
  return "unknown";
}

std::optional<Season> parse_season(const std::string& text) {
  for (Season s : kSeasons) {
    if (text == to_string(s)) return s;
  }
  if (text == "djf") return Season::Winter;
  if (text == "mam") return Season::Spring;
  if (text == "jja") return Season::Summer;
  if (text == "son" || text == "autumn") return Season::Fall;
  return std::nullopt;
}

Season season_of(const Date& d) {
  const unsigned m = static_cast<unsigned>(d.month());
  if (m == 12 || m <= 2) return Season::Winter;
  if (m <= 5) return Season::Spring;
  if (m <= 8) return Season::Summer;
  return Season::Fall;
}

std::size_t SeasonMask::count() const {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

std::array<SeasonMask, 4> season_masks(const TimeIndex& ti) {
  std::array<SeasonMask, 4> out;
  for (std::size_t s = 0; s < out.size(); ++s) {
    out[s].season = kSeasons[s];
    out[s].mask.assign(ti.size(), false);
  }
  for (std::size_t i = 0; i < ti.size(); ++i) {
    out[static_cast<std::size_t>(season_of(ti.date(i)))].mask[i] = true;
  }
  return out;
}

}  // namespace stcpd
