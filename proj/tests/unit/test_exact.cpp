#include "kmsf/errors.hpp"
#include "kmsf/exact.hpp"

#include <doctest.h>

#include <cmath>

using namespace kmsf;

TEST_SUITE("exact") {

TEST_CASE("parse_scalar keeps exact forms") {
  CHECK(parse_scalar("3/4").same_as(Scalar::rational(Rational(3, 4))));
  CHECK(parse_scalar("0.25").is_exact_rational());
  CHECK(parse_scalar("1e-3").same_as(Scalar::rational(Rational(1, 1000))));
  const Scalar l = parse_scalar("1+log(2)");
  CHECK(l.is_exact());
  CHECK_FALSE(l.is_exact_rational());
  CHECK(l.value() == doctest::Approx(1 + std::log(2.0)).epsilon(1e-15));
  CHECK_FALSE(parse_scalar("sqrt(2)").is_exact());
  CHECK(parse_scalar("sqrt(2)").value() == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(parse_scalar("log(-1)"), Error);
  CHECK_THROWS_AS(parse_scalar("1+"), ParseError);
}

TEST_CASE("logs of composite rationals split over primes") {
  const LogRational l12 = LogRational::log_of(12);
  const LogRational expect = LogRational::log_of(2).scaled(2) + LogRational::log_of(3);
  CHECK(l12 == expect);
  CHECK(LogRational::log_of(Rational(1, 8)) == LogRational::log_of(2).scaled(-3));
  CHECK(LogRational::log_of(1).is_zero());
}

TEST_CASE("ratio_to decides proportionality") {
  const LogRational a = LogRational::log_of(8);
  const LogRational b = LogRational::log_of(2);
  REQUIRE(a.ratio_to(b));
  CHECK(*a.ratio_to(b) == 3);
  CHECK_FALSE(LogRational::log_of(3).ratio_to(b));
  CHECK_FALSE((LogRational::from_rational(1) + b).ratio_to(b));
}

TEST_CASE("sign is exact near cancellation") {
  // ln 2^10 - ln 1024 is exactly zero; 10 ln 2 - 6.931471805599453 is tiny but positive
  CHECK((LogRational::log_of(2).scaled(10) - LogRational::log_of(1024)).sign() == 0);
  const LogRational tiny = LogRational::log_of(2).scaled(10) - LogRational::from_rational(Rational(6931471805599453, 1000000000000000));
  CHECK(tiny.sign() > 0);
}

TEST_CASE("exp_rational") {
  CHECK(*LogRational::log_of(Rational(3, 5)).exp_rational() == Rational(3, 5));
  CHECK(*LogRational::log_of(2).scaled(-2).exp_rational() == Rational(1, 4));
  CHECK_FALSE(LogRational::log_of(2).scaled(Rational(1, 2)).exp_rational());
  CHECK_FALSE(LogRational::from_rational(1).exp_rational());
}

TEST_CASE("str round-trips through the parser") {
  for (const char* s : {"0", "-3/2", "1+log(2)", "-3/2*log(3)+log(5)", "2*log(2)"}) {
    const Scalar x = parse_scalar(s);
    CHECK(parse_scalar(x.exact()->str()).same_as(x));
  }
}

TEST_CASE("Scalar arithmetic degrades to floating point only when it must") {
  const Scalar a = parse_scalar("1+log(2)");
  const Scalar b = parse_scalar("3/2");
  CHECK((a + b).is_exact());
  CHECK((a * b).is_exact());
  CHECK_FALSE((a * a).is_exact());
  CHECK((a * a).value() == doctest::Approx(a.value() * a.value()));
}

}  // TEST_SUITE
