#include "kmsf/exact.hpp"

#include "kmsf/errors.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace kmsf {

namespace {

using Float100 = boost::multiprecision::cpp_bin_float_100;

constexpr std::uint64_t kRationalKey = 1;
constexpr std::uint64_t kMaxFactorable = 1'000'000'000'000ULL;

void factor_into(BigInt n, int sign, std::map<std::uint64_t, Rational>& out) {
  if (n > kMaxFactorable) {
    throw InvalidArgument("log argument component " + n.str() +
                          " too large to factor exactly");
  }
  auto m = static_cast<std::uint64_t>(n);
  for (std::uint64_t p = 2; p * p <= m; p += (p == 2 ? 1 : 2)) {
    while (m % p == 0) {
      out[p] += sign;
      m /= p;
    }
  }
  if (m > 1) out[m] += sign;
}

}  // namespace

std::string to_string(const Rational& q) {
  const BigInt num = boost::multiprecision::numerator(q);
  const BigInt den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

Rational rational_gcd(const Rational& a, const Rational& b) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (a == 0) return abs(b);
  if (b == 0) return abs(a);
  const BigInt n = gcd(numerator(a), numerator(b));
  const BigInt d = lcm(denominator(a), denominator(b));
  return abs(Rational(n, d));
}

// --- LogRational --------------------------------------------------------------

LogRational LogRational::from_rational(Rational q) {
  LogRational r;
  r.add_term(kRationalKey, q);
  return r;
}

LogRational LogRational::log_of(const Rational& q) {
  if (q <= 0) throw InvalidArgument("log of non-positive number " + to_string(q));
  std::map<std::uint64_t, Rational> exps;
  factor_into(boost::multiprecision::numerator(q), +1, exps);
  factor_into(boost::multiprecision::denominator(q), -1, exps);
  LogRational r;
  for (const auto& [p, e] : exps) r.add_term(p, e);
  return r;
}

void LogRational::add_term(std::uint64_t key, const Rational& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.try_emplace(key, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

bool LogRational::is_rational() const noexcept {
  return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first == kRationalKey);
}

Rational LogRational::rational_part() const {
  auto it = terms_.find(kRationalKey);
  return it == terms_.end() ? Rational(0) : it->second;
}

double LogRational::to_double() const {
  double v = 0.0;
  for (const auto& [k, c] : terms_) {
    const double cd = static_cast<double>(c);
    v += k == kRationalKey ? cd : cd * std::log(static_cast<double>(k));
  }
  return v;
}

int LogRational::sign() const {
  if (terms_.empty()) return 0;
  Float100 v = 0;
  for (const auto& [k, c] : terms_) {
    Float100 cf = Float100(boost::multiprecision::numerator(c)) /
                  Float100(boost::multiprecision::denominator(c));
    v += k == kRationalKey ? cf : cf * log(Float100(k));
  }
  return v > 0 ? 1 : (v < 0 ? -1 : 0);
}

std::optional<Rational> LogRational::ratio_to(const LogRational& other) const {
  if (other.is_zero()) throw InvalidArgument("ratio_to: zero denominator");
  if (is_zero()) return Rational(0);
  if (terms_.size() != other.terms_.size()) return std::nullopt;
  std::optional<Rational> q;
  auto a = terms_.begin();
  for (auto b = other.terms_.begin(); b != other.terms_.end(); ++a, ++b) {
    if (a->first != b->first) return std::nullopt;
    Rational r = a->second / b->second;
    if (q && *q != r) return std::nullopt;
    q = r;
  }
  return q;
}

LogRational LogRational::operator-() const { return scaled(-1); }

LogRational& LogRational::operator+=(const LogRational& o) {
  for (const auto& [k, c] : o.terms_) add_term(k, c);
  return *this;
}

LogRational& LogRational::operator-=(const LogRational& o) {
  for (const auto& [k, c] : o.terms_) add_term(k, -c);
  return *this;
}

LogRational LogRational::scaled(const Rational& q) const {
  LogRational r;
  if (q == 0) return r;
  for (const auto& [k, c] : terms_) r.terms_.emplace(k, c * q);
  return r;
}

std::optional<Rational> LogRational::exp_rational(long max_exponent) const {
  Rational out = 1;
  for (const auto& [k, c] : terms_) {
    if (k == kRationalKey) return std::nullopt;
    if (boost::multiprecision::denominator(c) != 1) return std::nullopt;
    const BigInt e = boost::multiprecision::numerator(c);
    if (abs(e) > max_exponent) return std::nullopt;
    const long n = static_cast<long>(e);
    const Rational pk = Rational(boost::multiprecision::pow(BigInt(k), static_cast<unsigned>(std::abs(n))));
    out *= n >= 0 ? pk : 1 / pk;
  }
  return out;
}

bool LogRational::precedes(const LogRational& o) const {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  auto a = terms_.begin();
  auto b = o.terms_.begin();
  for (; a != terms_.end() && b != o.terms_.end(); ++a, ++b) {
    if (a->first != b->first) return a->first < b->first;
    if (a->second == b->second) continue;
    if (numerator(a->second) != numerator(b->second)) return numerator(a->second) < numerator(b->second);
    return denominator(a->second) < denominator(b->second);
  }
  return a == terms_.end() && b != o.terms_.end();
}

bool operator<(const LogRational& a, const LogRational& b) { return (b - a).sign() > 0; }

std::string LogRational::str() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (const auto& [k, c] : terms_) {
    Rational mag = abs(c);
    std::string piece;
    if (k == kRationalKey) {
      piece = to_string(mag);
    } else {
      piece = (mag == 1 ? std::string() : to_string(mag) + "*") + "log(" + std::to_string(k) + ")";
    }
    if (out.empty()) {
      out = (c < 0 ? "-" : "") + piece;
    } else {
      out += (c < 0 ? "-" : "+") + piece;
    }
  }
  return out;
}

// --- Scalar -------------------------------------------------------------------

Scalar::Scalar(LogRational e) : value_(e.to_double()), exact_(std::move(e)) {}

bool Scalar::is_zero() const { return exact_ ? exact_->is_zero() : value_ == 0.0; }

int Scalar::sign() const {
  if (exact_) return exact_->sign();
  return value_ > 0 ? 1 : (value_ < 0 ? -1 : 0);
}

Scalar Scalar::operator-() const {
  if (exact_) return Scalar(-*exact_);
  return Scalar(-value_);
}

Scalar operator+(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) return Scalar(*a.exact_ + *b.exact_);
  return Scalar(a.value_ + b.value_);
}

Scalar operator-(const Scalar& a, const Scalar& b) {
  if (a.exact_ && b.exact_) return Scalar(*a.exact_ - *b.exact_);
  return Scalar(a.value_ - b.value_);
}

Scalar operator*(const Scalar& a, const Scalar& b) {
  if (a.is_exact_rational() && b.exact_) return Scalar(b.exact_->scaled(a.exact_->rational_part()));
  if (b.is_exact_rational() && a.exact_) return Scalar(a.exact_->scaled(b.exact_->rational_part()));
  return Scalar(a.value_ * b.value_);
}

bool Scalar::same_as(const Scalar& o) const {
  if (exact_ && o.exact_) return *exact_ == *o.exact_;
  if (exact_.has_value() != o.exact_.has_value()) return false;
  return value_ == o.value_;
}

std::string Scalar::str() const {
  if (exact_) return exact_->str();
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value_);
  return buf;
}

// --- parser -------------------------------------------------------------------

namespace {

class ScalarParser {
 public:
  explicit ScalarParser(std::string_view s) : s_(s) {}

  Scalar parse() {
    Scalar v = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(0, "bad number '" + std::string(s_) + "': " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Scalar expr() {
    Scalar v = term();
    for (;;) {
      if (eat('+')) {
        v = v + term();
      } else if (eat('-')) {
        v = v - term();
      } else {
        return v;
      }
    }
  }

  Scalar term() {
    Scalar v = unary();
    for (;;) {
      if (eat('*')) {
        v = v * unary();
      } else if (eat('/')) {
        Scalar d = unary();
        if (d.is_zero()) fail("division by zero");
        if (d.is_exact_rational()) {
          v = v * Scalar::rational(1 / d.exact()->rational_part());
        } else {
          v = Scalar(v.value() / d.value());
        }
      } else {
        return v;
      }
    }
  }

  Scalar unary() {
    if (eat('-')) return -unary();
    if (eat('+')) return unary();
    return primary();
  }

  Scalar primary() {
    skip_ws();
    if (eat('(')) {
      Scalar v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) {
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      std::string name(s_.substr(start, pos_ - start));
      if (!eat('(')) fail("expected '(' after " + name);
      Scalar arg = expr();
      if (!eat(')')) fail("missing ')'");
      if (name == "log" || name == "ln") {
        if (arg.sign() <= 0) fail("log of non-positive value");
        if (arg.is_exact_rational()) return Scalar(LogRational::log_of(arg.exact()->rational_part()));
        return Scalar(std::log(arg.value()));
      }
      if (name == "sqrt") {
        if (arg.sign() < 0) fail("sqrt of negative value");
        return Scalar(std::sqrt(arg.value()));
      }
      fail("unknown function " + name);
    }
    return number();
  }

  Scalar number() {
    skip_ws();
    std::size_t start = pos_;
    BigInt mantissa = 0;
    int frac_digits = 0;
    bool any = false, dot = false;
    while (pos_ < s_.size()) {
      char c = s_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        mantissa = mantissa * 10 + (c - '0');
        if (dot) ++frac_digits;
        any = true;
      } else if (c == '.' && !dot) {
        dot = true;
      } else {
        break;
      }
      ++pos_;
    }
    if (!any) fail(start < s_.size() ? "expected a number" : "empty value");
    long exp10 = 0;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
      int esign = 1;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) esign = s_[pos_++] == '-' ? -1 : 1;
      bool edigit = false;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        exp10 = exp10 * 10 + (s_[pos_++] - '0');
        edigit = true;
        if (exp10 > 4000) fail("exponent out of range");
      }
      if (!edigit) fail("malformed exponent");
      exp10 *= esign;
    }
    exp10 -= frac_digits;
    Rational q(mantissa);
    BigInt scale = boost::multiprecision::pow(BigInt(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    q = exp10 < 0 ? q / Rational(scale) : q * Rational(scale);
    return Scalar::rational(q);
  }
};

}  // namespace

Scalar parse_scalar(std::string_view text) {
  Scalar v = ScalarParser(text).parse();
  if (!std::isfinite(v.value())) throw ParseError(0, "non-finite value '" + std::string(text) + "'");
  return v;
}

}  // namespace kmsf
