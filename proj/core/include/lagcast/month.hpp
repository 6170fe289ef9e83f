#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace lagcast {

// Calendar month. Ordered by (year, month); arithmetic is in whole months.
struct MonthIndex {
  int year = 1900;
  int month = 1;

  // Months since January of year 0.
  constexpr long ordinal() const noexcept { return static_cast<long>(year) * 12 + (month - 1); }
  static constexpr MonthIndex from_ordinal(long ordinal) noexcept {
    return MonthIndex{static_cast<int>(ordinal / 12), static_cast<int>(ordinal % 12) + 1};
  }

  constexpr MonthIndex plus(long months) const noexcept { return from_ordinal(ordinal() + months); }

  friend constexpr auto operator<=>(const MonthIndex&, const MonthIndex&) = default;
  friend constexpr long operator-(const MonthIndex& a, const MonthIndex& b) noexcept {
    return a.ordinal() - b.ordinal();
  }

  // "YYYY-MM"
  std::string to_string() const;
  // Parses "YYYY-MM"; throws Error(ParseError) on malformed input.
  static MonthIndex parse(std::string_view text);
  // Throws Error(InvalidParams) unless year >= 1900 and month in 1..12.
  static MonthIndex checked(int year, int month);
};

}  // namespace lagcast
