#include <doctest.h>

#include <limits>

#include "sds/errors.hpp"
#include "sds/rational.hpp"

using namespace sds;

TEST_CASE("values are kept in lowest terms with a positive denominator") {
  const ExactRational q(6, -4);
  CHECK(q.to_string() == "-3/2");
  CHECK(q.numerator_string() == "-3");
  CHECK(q.denominator_string() == "2");
  CHECK(ExactRational(4, 2).to_string() == "2");
  CHECK(ExactRational::parse("10/15") == ExactRational(2, 3));
  CHECK(ExactRational::parse("-7") == ExactRational(-7));
}

TEST_CASE("parse rejects malformed text") {
  CHECK_THROWS_AS(ExactRational::parse("1/0"), ConfigError);
  CHECK_THROWS_AS(ExactRational::parse("abc"), ConfigError);
  CHECK_THROWS_AS(ExactRational::parse("0.5"), ConfigError);
}

TEST_CASE("field arithmetic and ordering") {
  const ExactRational a(1, 3), b(1, 6);
  CHECK(a + b == ExactRational(1, 2));
  CHECK(a - b == ExactRational(1, 6));
  CHECK(a * b == ExactRational(1, 18));
  CHECK(a / b == ExactRational(2));
  CHECK(-a == ExactRational(-1, 3));
  CHECK(b < a);
  CHECK((a - ExactRational(1)).abs() == ExactRational(2, 3));
  CHECK(ExactRational(7, 2).floor() == ExactRational(3));
  CHECK(ExactRational(-7, 2).floor() == ExactRational(-4));
  CHECK(ExactRational(0).is_zero());
  CHECK(ExactRational(-2, 5).sign() == -1);
}

TEST_CASE("exact conversion from doubles") {
  CHECK(ExactRational::from_double(0.375) == ExactRational(3, 8));
  CHECK(ExactRational::from_double(0.1) != ExactRational(1, 10));
  CHECK(ExactRational::from_double(0.1).to_double() == 0.1);
  CHECK(ExactRational::nearest_simple(0.1) == ExactRational(1, 10));
  CHECK(ExactRational::nearest_simple(1.0 / 3.0) == ExactRational(1, 3));
  CHECK(ExactRational::nearest_simple(-2.5) == ExactRational(-5, 2));
  CHECK_THROWS(ExactRational::from_double(std::numeric_limits<double>::infinity()));
}

TEST_CASE("powers of two and dyadic structure of denominators") {
  CHECK(ExactRational::pow2(3) == ExactRational(8));
  CHECK(ExactRational::pow2(-3) == ExactRational(1, 8));
  const ExactRational x(5, 24);  // 5 / (3 * 2^3)
  CHECK(x.denominator_two_adic_valuation() == 3);
  CHECK(x.denominator_odd_part() == 3u);
  CHECK(!x.denominator_is_power_of_two());
  CHECK(ExactRational(3, 16).denominator_is_power_of_two());
}

TEST_CASE("rational gcd") {
  CHECK(ExactRational::gcd(ExactRational(1, 2), ExactRational(1, 3)) == ExactRational(1, 6));
  CHECK(ExactRational::gcd(ExactRational(4), ExactRational(6)) == ExactRational(2));
  CHECK(ExactRational::gcd(ExactRational(0), ExactRational(-3, 4)) == ExactRational(3, 4));
  CHECK(ExactRational::gcd(ExactRational(3, 4), ExactRational(5, 6)) == ExactRational(1, 12));
}
