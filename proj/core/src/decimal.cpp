#include "refsearch/decimal.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>

namespace refsearch {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

std::optional<Decimal> Decimal::parse(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
    negative = text[pos] == '-';
    ++pos;
  }

  std::string int_part;
  while (pos < text.size() && is_digit(text[pos])) int_part += text[pos++];
  if (int_part.empty()) return std::nullopt;

  std::string frac_part;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    while (pos < text.size() && is_digit(text[pos])) frac_part += text[pos++];
    if (frac_part.empty()) return std::nullopt;
  }

  std::int64_t exp10 = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    bool exp_negative = false;
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      exp_negative = text[pos] == '-';
      ++pos;
    }
    const std::size_t start = pos;
    while (pos < text.size() && is_digit(text[pos])) {
      exp10 = exp10 * 10 + (text[pos] - '0');
      if (exp10 > 1'000'000'000) return std::nullopt;
      ++pos;
    }
    if (pos == start) return std::nullopt;
    if (exp_negative) exp10 = -exp10;
  }
  if (pos != text.size()) return std::nullopt;

  // value = 0.(int_part frac_part) * 10^(len(int_part) + exp10)
  std::string all = int_part + frac_part;
  std::int64_t exponent = static_cast<std::int64_t>(int_part.size()) + exp10;
  std::size_t first = all.find_first_not_of('0');
  if (first == std::string::npos) return Decimal{};
  exponent -= static_cast<std::int64_t>(first);
  std::size_t last = all.find_last_not_of('0');

  Decimal d;
  d.negative_ = negative;
  d.exponent_ = static_cast<std::int32_t>(exponent);
  d.digits_ = all.substr(first, last - first + 1);
  return d;
}

Decimal Decimal::from_int(std::int64_t value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return *parse(std::string_view(buf.data(), end - buf.data()));
}

Decimal Decimal::from_uint(std::uint64_t value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return *parse(std::string_view(buf.data(), end - buf.data()));
}

std::optional<Decimal> Decimal::from_double(double value) {
  if (!std::isfinite(value)) return std::nullopt;
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return std::nullopt;
  return parse(std::string_view(buf.data(), end - buf.data()));
}

bool Decimal::is_integer() const {
  return is_zero() || exponent_ >= static_cast<std::int32_t>(digits_.size());
}

std::optional<std::int64_t> Decimal::to_int64() const {
  if (!is_integer()) return std::nullopt;
  if (is_zero()) return 0;
  if (exponent_ > 19) return std::nullopt;
  std::string text = negative_ ? "-" : "";
  text += digits_;
  text.append(static_cast<std::size_t>(exponent_) - digits_.size(), '0');
  std::int64_t out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc{}) return std::nullopt;
  return out;
}

double Decimal::to_double() const {
  const std::string text = to_string();
  double out = 0;
  std::from_chars(text.data(), text.data() + text.size(), out);
  return out;
}

std::string Decimal::to_string() const {
  if (is_zero()) return "0";
  std::string out = negative_ ? "-" : "";
  const auto n = static_cast<std::int64_t>(digits_.size());
  if (exponent_ <= 0) {
    out += "0.";
    out.append(static_cast<std::size_t>(-exponent_), '0');
    out += digits_;
  } else if (exponent_ >= n) {
    out += digits_;
    out.append(static_cast<std::size_t>(exponent_ - n), '0');
  } else {
    out += digits_.substr(0, static_cast<std::size_t>(exponent_));
    out += '.';
    out += digits_.substr(static_cast<std::size_t>(exponent_));
  }
  return out;
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  const int sign_a = a.is_zero() ? 0 : (a.negative_ ? -1 : 1);
  const int sign_b = b.is_zero() ? 0 : (b.negative_ ? -1 : 1);
  if (sign_a != sign_b) return sign_a <=> sign_b;
  if (sign_a == 0) return std::strong_ordering::equal;

  // Same sign, both non-zero: compare magnitudes, then flip for negatives.
  std::strong_ordering magnitude = a.exponent_ <=> b.exponent_;
  if (magnitude == std::strong_ordering::equal) {
    const int c = a.digits_.compare(b.digits_);
    magnitude = c <=> 0;
  }
  if (sign_a < 0) return 0 <=> magnitude;
  return magnitude;
}

}  // namespace refsearch
