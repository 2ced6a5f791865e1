#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace tabver {

/// Fixed-point decimal with nine fractional digits and a 128-bit mantissa.
/// Parsed table numbers are exact, so "3", "3.0" and "+3" compare equal.
class Decimal {
 public:
  static constexpr int kFracDigits = 9;
  static constexpr __int128 kScale = 1'000'000'000;

  constexpr Decimal() = default;
  constexpr Decimal(long long v) : units_(static_cast<__int128>(v) * kScale) {}  // NOLINT

  static constexpr Decimal from_units(__int128 units) {
    Decimal d;
    d.units_ = units;
    return d;
  }

  /// Accepts `[+-]?(digits|d{1,3}(,ddd)+)?(.digits)?` with at least one digit.
  /// Thousands separators are stripped. Surrounding whitespace is not allowed.
  static std::optional<Decimal> parse(std::string_view s) {
    std::size_t i = 0;
    bool neg = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      neg = s[i] == '-';
      ++i;
    }
    std::string int_digits;
    std::size_t group_len = 0;
    bool grouped = false;
    std::size_t first_group = 0;
    for (; i < s.size() && s[i] != '.'; ++i) {
      char c = s[i];
      if (c >= '0' && c <= '9') {
        int_digits.push_back(c);
        ++group_len;
      } else if (c == ',') {
        if (int_digits.empty()) return std::nullopt;
        if (!grouped) {
          first_group = group_len;
          if (first_group > 3) return std::nullopt;
        } else if (group_len != 3) {
          return std::nullopt;
        }
        grouped = true;
        group_len = 0;
      } else {
        return std::nullopt;
      }
    }
    if (grouped && group_len != 3) return std::nullopt;
    std::string frac_digits;
    if (i < s.size()) {
      ++i;  // '.'
      for (; i < s.size(); ++i) {
        if (s[i] < '0' || s[i] > '9') return std::nullopt;
        frac_digits.push_back(s[i]);
      }
      if (frac_digits.empty() && int_digits.empty()) return std::nullopt;
    }
    if (int_digits.empty() && frac_digits.empty()) return std::nullopt;
    // 30 integer digits keep the mantissa well inside int128.
    std::size_t lead = int_digits.find_first_not_of('0');
    if (lead != std::string::npos && int_digits.size() - lead > 28) return std::nullopt;

    __int128 units = 0;
    for (char c : int_digits) units = units * 10 + (c - '0');
    units *= kScale;
    __int128 frac = 0;
    int used = 0;
    for (; used < kFracDigits && used < static_cast<int>(frac_digits.size()); ++used)
      frac = frac * 10 + (frac_digits[used] - '0');
    for (int k = used; k < kFracDigits; ++k) frac *= 10;
    if (static_cast<int>(frac_digits.size()) > kFracDigits && frac_digits[kFracDigits] >= '5') ++frac;
    units += frac;
    return from_units(neg ? -units : units);
  }

  constexpr __int128 units() const { return units_; }

  double to_double() const { return static_cast<double>(units_) / static_cast<double>(kScale); }

  /// Shortest exact rendering: no trailing fractional zeros, no "-0".
  std::string to_string() const {
    __int128 u = units_ < 0 ? -units_ : units_;
    __int128 ip = u / kScale;
    __int128 fp = u % kScale;
    std::string int_str;
    if (ip == 0) int_str = "0";
    while (ip > 0) {
      int_str.insert(int_str.begin(), static_cast<char>('0' + static_cast<int>(ip % 10)));
      ip /= 10;
    }
    std::string out = (units_ < 0 ? "-" : "") + int_str;
    if (fp != 0) {
      std::string frac(kFracDigits, '0');
      for (int k = kFracDigits - 1; k >= 0; --k) {
        frac[k] = static_cast<char>('0' + static_cast<int>(fp % 10));
        fp /= 10;
      }
      while (!frac.empty() && frac.back() == '0') frac.pop_back();
      out += "." + frac;
    }
    return out;
  }

  Decimal abs() const { return from_units(units_ < 0 ? -units_ : units_); }

  friend constexpr Decimal operator+(Decimal a, Decimal b) { return from_units(a.units_ + b.units_); }
  friend constexpr Decimal operator-(Decimal a, Decimal b) { return from_units(a.units_ - b.units_); }
  Decimal& operator+=(Decimal o) {
    units_ += o.units_;
    return *this;
  }

  /// Multiplication by an integer is exact.
  friend constexpr Decimal operator*(Decimal a, long long k) { return from_units(a.units_ * k); }

  /// Division by a positive count, rounded half away from zero to the last digit.
  Decimal divided_by(long long n) const {
    __int128 q = units_ / n;
    __int128 r = units_ % n;
    if (r < 0) r = -r;
    if (2 * r >= n) q += units_ < 0 ? -1 : 1;
    return from_units(q);
  }

  friend constexpr auto operator<=>(Decimal a, Decimal b) = default;
  friend constexpr bool operator==(Decimal a, Decimal b) = default;

 private:
  __int128 units_ = 0;
};

}  // namespace tabver
