#include <gtest/gtest.h>

#include <random>

#include <boost/multiprecision/cpp_int.hpp>

#include "fgeo/rational.hpp"

using fgeo::Rational;
using fgeo::Real;
using Big = boost::multiprecision::cpp_rational;

namespace {

Big big(const Rational& r) { return Big(r.num()) / Big(r.den()); }

}  // namespace

TEST(Rational, NormalisesSignAndGcd) {
  const Rational r(6, -4);
  EXPECT_EQ(r.num(), -3);
  EXPECT_EQ(r.den(), 2);
  EXPECT_EQ(Rational(0, 5), Rational(0));
  EXPECT_EQ(Rational(0, 5).den(), 1);
}

TEST(Rational, FieldOperationsAgreeWithArbitraryPrecision) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> num(-2000, 2000), den(1, 500);
  for (int i = 0; i < 2000; ++i) {
    const Rational a(num(rng), den(rng));
    const Rational b(num(rng), den(rng));
    EXPECT_EQ(big(a + b), big(a) + big(b));
    EXPECT_EQ(big(a - b), big(a) - big(b));
    EXPECT_EQ(big(a * b), big(a) * big(b));
    if (!b.is_zero()) {
      EXPECT_EQ(big(a / b), big(a) / big(b));
    }
    EXPECT_EQ(a < b, big(a) < big(b));
  }
}

TEST(Rational, FixedRoundsHalfToEven) {
  EXPECT_EQ(Rational(1, 8).fixed(2), "0.12");
  EXPECT_EQ(Rational(3, 8).fixed(2), "0.38");
  EXPECT_EQ(Rational(5, 2).fixed(0), "2");
  EXPECT_EQ(Rational(7, 2).fixed(0), "4");
  EXPECT_EQ(Rational(-1, 8).fixed(2), "-0.12");
  EXPECT_EQ(Rational(2, 3).fixed(2), "0.67");
  EXPECT_EQ(Rational(80).fixed(2), "80.00");
}

TEST(Real, SquareRootsAreExact) {
  EXPECT_EQ(Real::sqrt(Rational(25)), Real(5));
  EXPECT_EQ(Real::sqrt(Rational(9, 4)), Real(Rational(3, 2)));
  const Real r2 = Real::sqrt(Rational(2));
  EXPECT_FALSE(r2.is_rational());
  EXPECT_EQ(r2 * r2, Real(2));
  EXPECT_EQ(Real::sqrt(Rational(8)).str(), "Mul(2,Sqrt(2))");
  EXPECT_THROW(Real::sqrt(Rational(-1)), fgeo::NotRepresentable);
}

TEST(Real, SignOfSurdSums) {
  const Real r2 = Real::sqrt(Rational(2));
  EXPECT_EQ((Real(Rational(141, 100)) - r2).sign(), -1);
  EXPECT_EQ((Real(Rational(142, 100)) - r2).sign(), 1);
  EXPECT_EQ((r2 - r2).sign(), 0);
}
