#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>

namespace liesym::expr {

/// Exact rational p/q with q > 0 and gcd(p, q) = 1.
///
/// Arithmetic is checked: any intermediate that does not fit in 64 bits
/// throws std::overflow_error instead of wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT(google-explicit-constructor)
  Rational(std::int64_t n, std::int64_t d);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_zero() const { return num_ == 0; }
  bool is_one() const { return num_ == 1 && den_ == 1; }
  bool is_integer() const { return den_ == 1; }
  bool is_negative() const { return num_ < 0; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  Rational operator-() const;
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend Rational operator/(const Rational& a, const Rational& b);

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

  /// a^k for integer k; throws std::domain_error for 0^negative.
  static Rational pow(const Rational& base, std::int64_t k);

  std::string to_string() const;

 private:
  static Rational from_wide(__int128 n, __int128 d);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// A numeric literal: either exact rational or IEEE double.
///
/// Mixed arithmetic degrades to double. Exactness-sensitive checks look at
/// is_exact() before trusting a zero.
class Number {
 public:
  Number() = default;
  Number(Rational r) : value_(r) {}  // NOLINT(google-explicit-constructor)
  Number(std::int64_t n) : value_(Rational(n)) {}  // NOLINT(google-explicit-constructor)
  static Number floating(double v) {
    Number n;
    n.value_ = v;
    return n;
  }

  bool is_exact() const { return std::holds_alternative<Rational>(value_); }
  const Rational& rational() const { return std::get<Rational>(value_); }
  double to_double() const;

  bool is_zero() const;
  bool is_one() const;
  bool is_minus_one() const;
  bool is_negative() const;
  bool is_integer() const { return is_exact() && rational().is_integer(); }

  Number operator-() const;
  friend Number operator+(const Number& a, const Number& b);
  friend Number operator*(const Number& a, const Number& b);
  friend Number operator/(const Number& a, const Number& b);

  /// Structural equality: 1 and 1.0 are different literals.
  friend bool operator==(const Number& a, const Number& b) { return a.value_ == b.value_; }
  /// Total order used for canonical sorting (exact before floating).
  friend int compare(const Number& a, const Number& b);

  std::string to_string() const;

 private:
  std::variant<Rational, double> value_;
};

}  // namespace liesym::expr
