#pragma once

#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace fluxmine {

/// Calendar day. Thin value wrapper over std::chrono::year_month_day with
/// ISO-8601 (YYYY-MM-DD) text conversion.
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::year_month_day ymd) : days_(std::chrono::sys_days{ymd}) {}
  Date(int y, unsigned m, unsigned d)
      : Date(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                         std::chrono::day{d}}) {}

  static std::optional<Date> parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    auto digits = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
      int v = 0;
      for (std::size_t i = pos; i < pos + len; ++i) {
        if (text[i] < '0' || text[i] > '9') return std::nullopt;
        v = v * 10 + (text[i] - '0');
      }
      return v;
    };
    auto y = digits(0, 4), m = digits(5, 2), d = digits(8, 2);
    if (!y || !m || !d) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{unsigned(*m)},
                                    std::chrono::day{unsigned(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return Date(ymd);
  }

  std::string iso() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
  }

  /// 0 = Sunday .. 6 = Saturday.
  unsigned weekday() const { return std::chrono::weekday{days_}.c_encoding(); }
  bool is_weekend() const { return weekday() == 0 || weekday() == 6; }

  Date plus_days(int n) const {
    Date out;
    out.days_ = days_ + std::chrono::days{n};
    return out;
  }

  /// Signed number of days from `other` to this date.
  int days_since(const Date& other) const { return int((days_ - other.days_).count()); }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace fluxmine
