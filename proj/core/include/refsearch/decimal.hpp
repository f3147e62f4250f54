#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace refsearch {

/// Exact base-10 number.
///
/// Stored as sign, significant digits and a decimal exponent so that
/// `0.d1d2...dn * 10^exponent` is the value. Digits carry no leading or
/// trailing zeros; zero has no digits. Comparison is exact for every value
/// that can be written as a finite decimal, which covers all JSON numbers
/// and all numeric query literals.
class Decimal {
 public:
  Decimal() = default;

  /// Parses `[+-]?digits[.digits][(e|E)[+-]?digits]`. Returns nullopt on any
  /// other input, including an empty string.
  static std::optional<Decimal> parse(std::string_view text);

  static Decimal from_int(std::int64_t value);
  static Decimal from_uint(std::uint64_t value);
  /// Uses the shortest round-trip representation of `value`. NaN and
  /// infinities have no decimal form and yield nullopt.
  static std::optional<Decimal> from_double(double value);

  bool is_zero() const { return digits_.empty(); }
  bool is_negative() const { return negative_; }
  bool is_integer() const;

  /// Integer value if this is an integer that fits in int64.
  std::optional<std::int64_t> to_int64() const;
  double to_double() const;

  /// Canonical plain-decimal rendering, e.g. "-12.5", "0.001", "1000".
  std::string to_string() const;

  friend bool operator==(const Decimal&, const Decimal&) = default;
  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);

 private:
  bool negative_ = false;
  std::int32_t exponent_ = 0;
  std::string digits_;
};

}  // namespace refsearch
