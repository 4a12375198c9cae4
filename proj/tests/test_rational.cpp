#include <gtest/gtest.h>

#include <random>

#include "mmcomm/quantity.hpp"
#include "mmcomm/rational.hpp"

using mmcomm::int128;
using mmcomm::Quantity;
using mmcomm::Rational;

TEST(Rational, NormalizesSignAndGcd) {
    Rational r{6, -4};
    EXPECT_EQ(r.numerator(), -3);
    EXPECT_EQ(r.denominator(), 2);
    EXPECT_EQ(Rational(0, 5), Rational(0));
    EXPECT_EQ(Rational(0, -7).denominator(), 1);
}

TEST(Rational, ZeroDenominatorThrows) {
    EXPECT_THROW(Rational(1, 0), std::domain_error);
    EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
}

TEST(Rational, Arithmetic) {
    Rational a{1, 3}, b{1, 6};
    EXPECT_EQ(a + b, Rational(1, 2));
    EXPECT_EQ(a - b, Rational(1, 6));
    EXPECT_EQ(a * b, Rational(1, 18));
    EXPECT_EQ(a / b, Rational(2));
    Rational c = a;
    c += b;
    c *= Rational(4);
    EXPECT_EQ(c, Rational(2));
}

TEST(Rational, DecimalRendering) {
    EXPECT_EQ(Rational(421875, 2).to_decimal(), "210937.5");
    EXPECT_EQ(Rational(-1, 8).to_decimal(), "-0.125");
    EXPECT_EQ(Rational(54).to_decimal(), "54");
    EXPECT_EQ(Rational(1, 3).to_decimal(), "0.333333333333");
    EXPECT_EQ(Rational(2, 3).to_decimal(4), "0.6667");
    EXPECT_EQ(Rational(-2, 3).to_decimal(4), "-0.6667");
    EXPECT_EQ(Rational(421875, 2).to_fraction(), "421875/2");
}

TEST(Rational, ParseAcceptsIntegersFractionsDecimals) {
    EXPECT_EQ(Rational::parse("42"), Rational(42));
    EXPECT_EQ(Rational::parse(" 6/4 "), Rational(3, 2));
    EXPECT_EQ(Rational::parse("210937.5"), Rational(421875, 2));
    EXPECT_EQ(Rational::parse("-0.125"), Rational(-1, 8));
    EXPECT_THROW(Rational::parse("abc"), std::invalid_argument);
    EXPECT_THROW(Rational::parse("1."), std::invalid_argument);
    EXPECT_THROW(Rational::parse(""), std::invalid_argument);
}

TEST(Rational, OverflowIsReported) {
    const int128 big = int128{1} << 100;
    EXPECT_THROW(Rational(big) * Rational(big), std::overflow_error);
}

TEST(Rational, CompareHandlesHugeTerms) {
    const int128 big = (int128{1} << 120) - 1;
    Rational a{big, big - 2}, b{big - 1, big - 3};
    // a = 1 + 2/(big-2) < b = 1 + 2/(big-3)
    EXPECT_LT(a, b);
    EXPECT_GT(b, a);
    EXPECT_EQ(a <=> a, std::strong_ordering::equal);
}

// Cross-multiplication is exact for small operands, so it is an independent
// reference for the continued-fraction comparison.
TEST(RationalProperty, OrderingMatchesCrossMultiplication) {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<long long> num(-1000000, 1000000), den(1, 1000000);
    for (int i = 0; i < 20000; ++i) {
        long long a = num(rng), b = den(rng), c = num(rng), d = den(rng);
        int128 lhs = int128{a} * d, rhs = int128{c} * b;
        auto expect = lhs < rhs ? std::strong_ordering::less
                                : (lhs > rhs ? std::strong_ordering::greater : std::strong_ordering::equal);
        ASSERT_EQ(Rational(a, b) <=> Rational(c, d), expect) << a << "/" << b << " vs " << c << "/" << d;
    }
}

TEST(RationalProperty, DecimalRoundTrip) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<long long> num(-1000000000, 1000000000);
    std::uniform_int_distribution<int> two(0, 12), five(0, 8);
    for (int i = 0; i < 5000; ++i) {
        long long den = (1LL << two(rng));
        for (int j = five(rng); j > 0; --j) den *= 5;
        Rational r{num(rng), den};
        ASSERT_EQ(Rational::parse(r.to_decimal()), r) << r;
        ASSERT_EQ(Rational::parse(r.to_fraction()), r);
    }
}

TEST(RationalProperty, FieldIdentities) {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<long long> num(-5000, 5000), den(1, 5000);
    for (int i = 0; i < 5000; ++i) {
        Rational a{num(rng), den(rng)}, b{num(rng), den(rng)}, c{num(rng), den(rng)};
        ASSERT_EQ((a + b) * c, a * c + b * c);
        ASSERT_EQ(a - b + b, a);
        if (!b.is_zero()) {
            ASSERT_EQ(a / b * b, a);
        }
    }
}

TEST(Rational, FloorAndRoots) {
    EXPECT_EQ(Rational(-7, 2).floor(), -4);
    EXPECT_EQ(Rational(7, 2).floor(), 3);
    EXPECT_EQ(mmcomm::exact_root(Rational(27, 8), 3), Rational(3, 2));
    EXPECT_EQ(mmcomm::exact_root(Rational(16), 2), Rational(4));
    EXPECT_FALSE(mmcomm::exact_root(Rational(2), 2).has_value());
    EXPECT_FALSE(mmcomm::exact_root(Rational(-4), 2).has_value());
}

TEST(Quantity, StaysExactForPerfectPowers) {
    Quantity q = mmcomm::pow_two_thirds(Rational(4096));
    ASSERT_TRUE(q.is_exact());
    EXPECT_EQ(*q.exact(), Rational(256));
    EXPECT_TRUE(mmcomm::sqrt(Rational(9, 4)).is_exact());
    EXPECT_FALSE(mmcomm::cbrt(Rational(4)).is_exact());
}

TEST(Quantity, ApproximateArithmeticAndCompare) {
    Quantity x = mmcomm::cbrt(Rational(2));
    Quantity cube = x * x * x;
    EXPECT_FALSE(cube.is_exact());
    EXPECT_TRUE(mmcomm::approx_equal(cube, Quantity{2}));
    EXPECT_EQ(mmcomm::compare(Quantity{8}, mmcomm::pow_two_thirds(Rational(4)) * Quantity{3}), 1);
    EXPECT_EQ(mmcomm::compare(Quantity{1}, Quantity{2}), -1);
    EXPECT_EQ(mmcomm::max(Quantity{1}, Quantity{Rational(3, 2)}).exact(), Rational(3, 2));
}
