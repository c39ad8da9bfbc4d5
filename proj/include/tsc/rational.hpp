#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace tsc {

/// Exact signed rational with a positive denominator, always kept in lowest
/// terms. Arithmetic throws tsc::Error(invalid_argument) on int64 overflow.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT(implicit)
  Rational(std::int64_t num, std::int64_t den);

  std::int64_t num() const noexcept { return num_; }
  std::int64_t den() const noexcept { return den_; }

  double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
  bool is_integer() const noexcept { return den_ == 1; }

  /// Largest integer <= value, smallest integer >= value, nearest (ties away from zero).
  std::int64_t floor() const noexcept;
  std::int64_t ceil() const noexcept;
  std::int64_t round() const noexcept;

  /// Accepts "3", "-2.125", "1e-3", "30000/1001". Decimal text converts exactly.
  static Rational parse(std::string_view text);
  /// Nearest rational with the given denominator.
  static Rational from_double(double value, std::int64_t den);

  /// Integer, exact decimal when the denominator divides a power of ten, else "num/den".
  std::string to_string() const;

  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);
  Rational operator-() const { return Rational(-num_, den_); }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational& a, const Rational& b) noexcept {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace tsc
