#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <cstdlib>
#include <string>

namespace mcal {

/// Dollar amount held as integer micro-dollars so that sums are exact.
class Money {
 public:
  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  static Money from_dollars(double dollars) {
    return Money(static_cast<std::int64_t>(std::llround(dollars * 1e6)));
  }

  constexpr std::int64_t micros() const { return micros_; }
  constexpr double dollars() const { return static_cast<double>(micros_) / 1e6; }

  /// Decimal dollars with exactly six fractional digits, e.g. "190.000000".
  std::string to_string() const {
    const bool negative = micros_ < 0;
    const std::uint64_t abs = negative ? static_cast<std::uint64_t>(-(micros_ + 1)) + 1
                                       : static_cast<std::uint64_t>(micros_);
    std::string frac = std::to_string(abs % 1000000);
    frac.insert(0, 6 - frac.size(), '0');
    return (negative ? "-" : "") + std::to_string(abs / 1000000) + "." + frac;
  }

  constexpr Money& operator+=(Money other) {
    micros_ += other.micros_;
    return *this;
  }
  constexpr Money& operator-=(Money other) {
    micros_ -= other.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return Money(a.micros_ + b.micros_); }
  friend constexpr Money operator-(Money a, Money b) { return Money(a.micros_ - b.micros_); }
  friend constexpr Money operator*(Money a, std::int64_t count) { return Money(a.micros_ * count); }
  friend constexpr Money operator*(std::int64_t count, Money a) { return Money(a.micros_ * count); }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace mcal
