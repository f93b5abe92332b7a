#pragma once

// Numbers used for potentials, inverse temperatures and detour weights.
//
// LogRational is an element of the Q-vector space spanned by 1 and ln p for
// primes p. Those generators are linearly independent over Q as real numbers
// (Lindemann plus unique factorisation), so two LogRationals have a rational
// ratio exactly when they are proportional as coefficient vectors. This is
// what makes the exact real-gcd decidable.

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace kmsf {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

std::string to_string(const Rational& q);
Rational rational_gcd(const Rational& a, const Rational& b);

class LogRational {
 public:
  LogRational() = default;
  static LogRational from_rational(Rational q);
  /// ln(q) for q > 0, expanded over prime factors.
  static LogRational log_of(const Rational& q);

  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_rational() const noexcept;
  Rational rational_part() const;

  double to_double() const;
  /// Sign evaluated in 100-digit arithmetic; exact zero is detected structurally.
  int sign() const;

  /// e^x as an exact rational: needs a zero rational part and integer
  /// coefficients of at most `max_exponent` in absolute value.
  std::optional<Rational> exp_rational(long max_exponent = 4096) const;

  /// q with *this == q * other, if it exists. other must be non-zero.
  std::optional<Rational> ratio_to(const LogRational& other) const;

  LogRational operator-() const;
  LogRational& operator+=(const LogRational& o);
  LogRational& operator-=(const LogRational& o);
  LogRational scaled(const Rational& q) const;

  friend LogRational operator+(LogRational a, const LogRational& b) { return a += b; }
  friend LogRational operator-(LogRational a, const LogRational& b) { return a -= b; }
  friend bool operator==(const LogRational&, const LogRational&) = default;
  friend bool operator<(const LogRational& a, const LogRational& b);

  /// Lexicographic order on coefficient vectors; a cheap total order for use
  /// as a container key, unrelated to the numeric order.
  bool precedes(const LogRational& o) const;

  /// Parseable text, e.g. "1+log(2)" or "-3/2*log(3)".
  std::string str() const;

 private:
  // key 1 holds the rational part, key p a prime holds the coefficient of ln p
  std::map<std::uint64_t, Rational> terms_;

  void add_term(std::uint64_t key, const Rational& c);
};

/// A real number carried as a double, plus its exact LogRational form when one
/// is known. Arithmetic keeps the exact form whenever the result stays inside
/// the LogRational field.
class Scalar {
 public:
  Scalar() = default;
  Scalar(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)
  explicit Scalar(LogRational e);
  static Scalar rational(const Rational& q) { return Scalar(LogRational::from_rational(q)); }

  double value() const noexcept { return value_; }
  const std::optional<LogRational>& exact() const noexcept { return exact_; }
  bool is_exact() const noexcept { return exact_.has_value(); }
  bool is_exact_rational() const noexcept { return exact_ && exact_->is_rational(); }
  /// Exact zero when exact, value()==0 otherwise.
  bool is_zero() const;
  int sign() const;

  Scalar operator-() const;
  friend Scalar operator+(const Scalar& a, const Scalar& b);
  friend Scalar operator-(const Scalar& a, const Scalar& b);
  /// Exact only when one factor is an exact rational.
  friend Scalar operator*(const Scalar& a, const Scalar& b);

  /// Exact equality when both are exact, bitwise double equality otherwise.
  bool same_as(const Scalar& o) const;

  std::string str() const;

 private:
  double value_ = 0.0;
  std::optional<LogRational> exact_;
};

/// Parse "1", "-2.5", "3/4", "1e-3", "1+log(2)", "1 - 2*ln(3/5)", "sqrt(2)".
/// Decimals and ratios are exact; sqrt() is accepted but yields an inexact
/// Scalar. Throws ParseError.
Scalar parse_scalar(std::string_view text);

}  // namespace kmsf
