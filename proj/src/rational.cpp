#include "tsc/rational.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "tsc/error.hpp"

namespace tsc {
namespace {

using Wide = __int128;

std::int64_t narrow(Wide v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min()) {
    throw Error(Errc::invalid_argument, "rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Rational make(Wide num, Wide den) {
  if (den == 0) throw Error(Errc::invalid_argument, "rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(narrow(num), narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) throw Error(Errc::invalid_argument, "rational with zero denominator");
  Wide n = num, d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  Wide g = wide_gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = narrow(n);
  den_ = narrow(d);
}

std::int64_t Rational::floor() const noexcept {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ < 0) --q;
  return q;
}

std::int64_t Rational::ceil() const noexcept {
  std::int64_t q = num_ / den_;
  if (num_ % den_ != 0 && num_ > 0) ++q;
  return q;
}

std::int64_t Rational::round() const noexcept {
  Wide twice = Wide{num_} * 2;
  Wide d = den_;
  Wide q = (twice >= 0 ? twice + d : twice - d) / (2 * d);
  return static_cast<std::int64_t>(q);
}

Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Error {
    return Error(Errc::non_numeric, "not a rational number: '" + std::string(text) + "'");
  };
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    Rational n = parse(text.substr(0, slash));
    Rational d = parse(text.substr(slash + 1));
    if (d.num_ == 0) throw fail();
    return n / d;
  }
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  Wide num = 0;
  int scale = 0;
  bool any_digit = false;
  bool seen_point = false;
  for (; i < text.size(); ++i) {
    char c = text[i];
    if (c >= '0' && c <= '9') {
      any_digit = true;
      num = num * 10 + (c - '0');
      if (seen_point) ++scale;
      if (num > (Wide{1} << 100)) throw fail();
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!any_digit) throw fail();
  int exponent = 0;
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    bool exp_negative = false;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) exp_negative = text[i++] == '-';
    bool exp_digit = false;
    for (; i < text.size() && text[i] >= '0' && text[i] <= '9'; ++i) {
      exp_digit = true;
      exponent = exponent * 10 + (text[i] - '0');
      if (exponent > 36) throw fail();
    }
    if (!exp_digit) throw fail();
    if (exp_negative) exponent = -exponent;
  }
  if (i != text.size()) throw fail();
  int power = exponent - scale;
  Wide den = 1;
  if (power < 0) {
    if (power < -36) throw fail();
    for (int p = 0; p < -power; ++p) den *= 10;
  } else {
    for (int p = 0; p < power; ++p) {
      num *= 10;
      if (num > (Wide{1} << 100)) throw fail();
    }
  }
  return make(negative ? -num : num, den);
}

Rational Rational::from_double(double value, std::int64_t den) {
  if (!std::isfinite(value)) throw Error(Errc::invalid_argument, "non-finite value cannot become a rational");
  double scaled = std::round(value * static_cast<double>(den));
  if (std::fabs(scaled) > 9.0e18) throw Error(Errc::invalid_argument, "rational arithmetic overflow");
  return Rational(static_cast<std::int64_t>(scaled), den);
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  // Exact decimal if den = 2^a 5^b.
  std::int64_t d = den_;
  int twos = 0, fives = 0;
  while (d % 2 == 0) { d /= 2; ++twos; }
  while (d % 5 == 0) { d /= 5; ++fives; }
  if (d == 1) {
    int digits = std::max(twos, fives);
    Wide scale = 1;
    for (int i = 0; i < digits; ++i) scale *= 10;
    Wide scaled = Wide{num_} * (scale / den_);
    bool negative = scaled < 0;
    if (negative) scaled = -scaled;
    Wide whole = scaled / scale;
    Wide frac = scaled % scale;
    std::string frac_text(static_cast<std::size_t>(digits), '0');
    for (int i = digits - 1; i >= 0; --i) {
      frac_text[static_cast<std::size_t>(i)] = static_cast<char>('0' + static_cast<int>(frac % 10));
      frac /= 10;
    }
    return (negative ? "-" : "") + std::to_string(static_cast<std::int64_t>(whole)) + "." + frac_text;
  }
  return std::to_string(num_) + "/" + std::to_string(den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make(Wide{a.num_} * b.den_ + Wide{b.num_} * a.den_, Wide{a.den_} * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) {
  return make(Wide{a.num_} * b.den_ - Wide{b.num_} * a.den_, Wide{a.den_} * b.den_);
}

Rational operator*(const Rational& a, const Rational& b) {
  return make(Wide{a.num_} * b.num_, Wide{a.den_} * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw Error(Errc::invalid_argument, "rational division by zero");
  return make(Wide{a.num_} * b.den_, Wide{a.den_} * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) noexcept {
  Wide lhs = Wide{a.num_} * b.den_;
  Wide rhs = Wide{b.num_} * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace tsc
