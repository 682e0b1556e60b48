#pragma once

#include <array>
#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace stcpd {

using Date = std::chrono::year_month_day;

enum class Calendar { Gregorian, NoLeap };

/// Parses YYYY-MM-DD; returns nullopt on malformed or invalid dates.
std::optional<Date> parse_date(const std::string& text);
std::string format_date(const Date& d);

/// Consecutive daily time steps. With Calendar::NoLeap, February 29 is skipped.
class TimeIndex {
 public:
  TimeIndex() = default;
  TimeIndex(Date start, std::size_t length, Calendar calendar = Calendar::Gregorian);

  std::size_t size() const noexcept { return dates_.size(); }
  const Date& date(std::size_t i) const { return dates_.at(i); }
  const Date& start() const { return dates_.front(); }
  Calendar calendar() const noexcept { return calendar_; }
  std::optional<std::size_t> find(const Date& d) const;

 private:
  std::vector<Date> dates_;
  Calendar calendar_ = Calendar::Gregorian;
};

enum class Season { Winter, Spring, Summer, Fall };

inline constexpr std::array<Season, 4> kSeasons{Season::Winter, Season::Spring, Season::Summer,
                                                Season::Fall};

const char* to_string(Season s) noexcept;
std::optional<Season> parse_season(const std::string& text);

/// DJF / MAM / JJA / SON.
Season season_of(const Date& d);

struct SeasonMask {
  Season season = Season::Winter;
  std::vector<bool> mask;

  std::size_t count() const;
};

/// One mask per season, in kSeasons order; together they partition the index.
std::array<SeasonMask, 4> season_masks(const TimeIndex& ti);

}  // namespace stcpd
