#include "liesym/expr/number.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace liesym::expr {

namespace {

__int128 wide_gcd(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(__int128 v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

}  // namespace

Rational::Rational(std::int64_t n, std::int64_t d) {
  *this = from_wide(n, d);
}

Rational Rational::from_wide(__int128 n, __int128 d) {
  if (d == 0) throw std::domain_error("rational with zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  __int128 g = wide_gcd(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  if (!fits(n) || !fits(d)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(n);
  r.den_ = static_cast<std::int64_t>(d);
  return r;
}

Rational Rational::operator-() const {
  return from_wide(-static_cast<__int128>(num_), den_);
}

Rational operator+(const Rational& a, const Rational& b) {
  __int128 n = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
  __int128 d = static_cast<__int128>(a.den_) * b.den_;
  return Rational::from_wide(n, d);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.num_,
                             static_cast<__int128>(a.den_) * b.den_);
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num_ == 0) throw std::domain_error("division by zero");
  return Rational::from_wide(static_cast<__int128>(a.num_) * b.den_,
                             static_cast<__int128>(a.den_) * b.num_);
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
  __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Rational Rational::pow(const Rational& base, std::int64_t k) {
  if (k < 0) {
    if (base.is_zero()) throw std::domain_error("zero to a negative power");
    return pow(Rational(1) / base, -k);
  }
  Rational result(1);
  Rational b = base;
  while (k > 0) {
    if (k & 1) result = result * b;
    k >>= 1;
    if (k > 0) b = b * b;
  }
  return result;
}

std::string Rational::to_string() const {
  if (den_ == 1) return std::to_string(num_);
  return std::to_string(num_) + "/" + std::to_string(den_);
}

double Number::to_double() const {
  if (is_exact()) return rational().to_double();
  return std::get<double>(value_);
}

bool Number::is_zero() const {
  return is_exact() ? rational().is_zero() : std::get<double>(value_) == 0.0;
}

bool Number::is_one() const {
  return is_exact() ? rational().is_one() : std::get<double>(value_) == 1.0;
}

bool Number::is_minus_one() const {
  return is_exact() ? rational() == Rational(-1) : std::get<double>(value_) == -1.0;
}

bool Number::is_negative() const {
  return is_exact() ? rational().is_negative() : std::get<double>(value_) < 0.0;
}

Number Number::operator-() const {
  if (is_exact()) return Number(-rational());
  return floating(-std::get<double>(value_));
}

Number operator+(const Number& a, const Number& b) {
  if (a.is_exact() && b.is_exact()) return Number(a.rational() + b.rational());
  return Number::floating(a.to_double() + b.to_double());
}

Number operator*(const Number& a, const Number& b) {
  if (a.is_exact() && b.is_exact()) return Number(a.rational() * b.rational());
  return Number::floating(a.to_double() * b.to_double());
}

Number operator/(const Number& a, const Number& b) {
  if (a.is_exact() && b.is_exact()) return Number(a.rational() / b.rational());
  return Number::floating(a.to_double() / b.to_double());
}

int compare(const Number& a, const Number& b) {
  if (a.is_exact() != b.is_exact()) return a.is_exact() ? -1 : 1;
  if (a.is_exact()) {
    auto c = a.rational() <=> b.rational();
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  double x = a.to_double();
  double y = b.to_double();
  if (x < y) return -1;
  if (x > y) return 1;
  return 0;
}

std::string Number::to_string() const {
  if (is_exact()) return rational().to_string();
  double v = std::get<double>(value_);
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

}  // namespace liesym::expr
