#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

#include "mmcomm/core_model.hpp"

using namespace mmcomm;

namespace {

// Straight transcription of the three-case bound in long double, sorting
// the dimensions itself and picking the case with float comparisons.
struct NaiveBound {
    long double accessed;
    long double bound;
    int regime;  // 1, 2, 3
};

NaiveBound naive_bound(long double a, long double b, long double c, long double P) {
    std::array<long double, 3> d{a, b, c};
    std::sort(d.begin(), d.end(), std::greater<>());
    long double m = d[0], n = d[1], k = d[2];
    NaiveBound r{};
    if (P <= m / n) {
        r.regime = 1;
        r.accessed = (m * n + m * k) / P + n * k;
    } else if (P <= m * n / (k * k)) {
        r.regime = 2;
        r.accessed = 2 * std::sqrt(m * n * k * k / P) + m * n / P;
    } else {
        r.regime = 3;
        r.accessed = 3 * std::pow(m * n * k / P, 2.0L / 3.0L);
    }
    r.bound = std::max(0.0L, r.accessed - (m * n + m * k + n * k) / P);
    return r;
}

int regime_number(RegimeKind k) { return k == RegimeKind::OneD ? 1 : (k == RegimeKind::TwoD ? 2 : 3); }

}  // namespace

TEST(ProblemShape, SortsDimensions) {
    ProblemShape s{600, 9600, 2400};
    EXPECT_EQ(s.m(), 9600);
    EXPECT_EQ(s.n(), 2400);
    EXPECT_EQ(s.k(), 600);
    EXPECT_EQ(s.sorted_axis(0), 1);
    EXPECT_EQ(s.sorted_axis(1), 2);
    EXPECT_EQ(s.sorted_axis(2), 0);
    EXPECT_EQ(s.pairwise_sum(), int128{600} * 9600 + int128{9600} * 2400 + int128{600} * 2400);
}

TEST(ProblemShape, TiesKeepAxisOrder) {
    ProblemShape s{7, 7, 7};
    EXPECT_EQ(s.sorted_axis(0), 0);
    EXPECT_EQ(s.sorted_axis(1), 1);
    EXPECT_EQ(s.sorted_axis(2), 2);
}

TEST(ProblemShape, RejectsNonPositive) {
    EXPECT_THROW(ProblemShape(0, 1, 1), std::invalid_argument);
    EXPECT_THROW(ProblemShape(1, -2, 1), std::invalid_argument);
}

TEST(Regime, ClassifiesAndMarksBoundaries) {
    EXPECT_EQ(classify_regime(ProblemShape{9600, 2400, 600}, 3), (Regime{RegimeKind::OneD, false}));
    EXPECT_EQ(classify_regime(ProblemShape{9600, 2400, 600}, 4), (Regime{RegimeKind::OneD, true}));
    EXPECT_EQ(classify_regime(ProblemShape{9600, 2400, 600}, 36), (Regime{RegimeKind::TwoD, false}));
    EXPECT_EQ(classify_regime(ProblemShape{9600, 2400, 600}, 64), (Regime{RegimeKind::TwoD, true}));
    EXPECT_EQ(classify_regime(ProblemShape{9600, 2400, 600}, 65), (Regime{RegimeKind::ThreeD, false}));
    // m = n: P = 1 is the 1D/2D boundary
    EXPECT_EQ(classify_regime(ProblemShape{5, 5, 5}, 1), (Regime{RegimeKind::OneD, true}));
    EXPECT_THROW(classify_regime(1, 2, 3, 4), std::invalid_argument);
    EXPECT_THROW(classify_regime(ProblemShape{2, 2, 2}, 0), std::invalid_argument);
}

TEST(LowerBound, WorkedValues) {
    BoundReport big = lower_bound(ProblemShape{9600, 2400, 600}, 512);
    EXPECT_EQ(big.regime.tag, RegimeKind::ThreeD);
    EXPECT_EQ(big.accessed.exact(), Rational(270000));
    EXPECT_EQ(big.owned, Rational(118125, 2));
    EXPECT_EQ(big.lower_bound.exact(), Rational(421875, 2));

    BoundReport two = lower_bound(ProblemShape{96, 24, 6}, 36);
    EXPECT_EQ(two.regime.tag, RegimeKind::TwoD);
    EXPECT_EQ(two.accessed.exact(), Rational(160));
    EXPECT_EQ(two.owned, Rational(84));
    EXPECT_EQ(two.lower_bound.exact(), Rational(76));

    EXPECT_EQ(lower_bound(ProblemShape{96, 24, 6}, 3).lower_bound.exact(), Rational(96));
    EXPECT_EQ(lower_bound(ProblemShape{96, 96, 96}, 8).lower_bound.exact(), Rational(3456));
    EXPECT_EQ(lower_bound(ProblemShape{5, 5, 5}, 1).lower_bound.exact(), Rational(0));
}

TEST(LowerBound, IrrationalCaseIsApproximate) {
    BoundReport r = lower_bound(ProblemShape{2, 2, 2}, 2);
    EXPECT_FALSE(r.accessed.is_exact());
    EXPECT_NEAR(static_cast<double>(r.accessed.value()), 3 * std::pow(4.0, 2.0 / 3.0), 1e-12);
}

TEST(LowerBound, SquareCorollary) {
    BoundReport r = square_bound(12, 8);
    EXPECT_EQ(r.lower_bound.exact(), Rational(54));
    // 3 n^2 / P^(2/3) - 3 n^2 / P
    for (Dim n : {8, 16, 64})
        for (Dim P : {1, 8, 27, 64}) {
            Dim c = static_cast<Dim>(std::llround(std::cbrt(static_cast<double>(P))));
            Rational expect = Rational(3 * n * n, c * c) - Rational(3 * n * n, P);
            EXPECT_EQ(square_bound(n, P).lower_bound.exact(), expect) << n << " " << P;
        }
}

TEST(LowerBound, ExceedsWorkFlag) {
    EXPECT_TRUE(lower_bound(ProblemShape{2, 1, 1}, 3).exceeds_work);
    EXPECT_FALSE(lower_bound(ProblemShape{2, 1, 1}, 2).exceeds_work);
    EXPECT_EQ(lower_bound(ProblemShape{2, 1, 1}, 2).lower_bound.exact(), Rational(1, 2));
}

TEST(LowerBoundProperty, MatchesNaiveFormula) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<Dim> dim(1, 3000);
    std::uniform_int_distribution<Dim> procs(1, 100000);
    for (int i = 0; i < 5000; ++i) {
        Dim a = dim(rng), b = dim(rng), c = dim(rng), P = procs(rng);
        BoundReport r = lower_bound(ProblemShape{a, b, c}, P);
        NaiveBound nb = naive_bound(a, b, c, P);
        long double tol = 1e-12L * std::max(1.0L, nb.accessed);
        ASSERT_NEAR(static_cast<double>(r.accessed.value()), static_cast<double>(nb.accessed),
                    static_cast<double>(tol)) << a << " " << b << " " << c << " P=" << P;
        ASSERT_NEAR(static_cast<double>(r.lower_bound.value()), static_cast<double>(nb.bound),
                    static_cast<double>(tol));
        // boundary values may land either side in floating point
        if (!r.regime.on_boundary) {
            ASSERT_EQ(regime_number(r.regime.tag), nb.regime);
        }
    }
}

TEST(LowerBoundProperty, PermutationInvariant) {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<Dim> dim(1, 500), procs(1, 5000);
    for (int i = 0; i < 1000; ++i) {
        Dim a = dim(rng), b = dim(rng), c = dim(rng), P = procs(rng);
        Quantity ref = lower_bound(ProblemShape{a, b, c}, P).lower_bound;
        for (auto s : {ProblemShape{b, a, c}, ProblemShape{c, b, a}, ProblemShape{b, c, a}})
            ASSERT_TRUE(approx_equal(lower_bound(s, P).lower_bound, ref));
    }
}

TEST(LowerBoundProperty, AccessedDataNonIncreasingInP) {
    for (auto s : {ProblemShape{9600, 2400, 600}, ProblemShape{96, 24, 6}, ProblemShape{10, 10, 10}}) {
        Quantity prev = accessed_data(s, 1);
        for (Dim P = 2; P <= 2000; ++P) {
            Quantity cur = accessed_data(s, P);
            ASSERT_LE(compare(cur, prev), 0) << "P=" << P;
            prev = cur;
        }
    }
}

// m = k a b, n = k a: boundaries at P = b and P = a^2 b, both integers.
TEST(LowerBoundProperty, ContinuousAtBoundaries) {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<Dim> small(1, 12), base(1, 40);
    for (int i = 0; i < 1000; ++i) {
        Dim k = base(rng), a = small(rng), b = small(rng);
        Dim n = k * a, m = n * b;
        Dim p1 = b, p2 = a * a * b;
        Quantity one = accessed_data_formula(RegimeKind::OneD, m, n, k, p1);
        Quantity two = accessed_data_formula(RegimeKind::TwoD, m, n, k, p1);
        ASSERT_EQ(compare(one, two), 0) << m << " " << n << " " << k;
        Quantity two_b = accessed_data_formula(RegimeKind::TwoD, m, n, k, p2);
        Quantity three_b = accessed_data_formula(RegimeKind::ThreeD, m, n, k, p2);
        ASSERT_EQ(compare(two_b, three_b), 0) << m << " " << n << " " << k;
    }
}

TEST(Memory, InfeasibleMemoryRejected) {
    ProblemShape s{96, 24, 6};
    EXPECT_THROW(lower_bound(s, 36, Rational(83)), std::invalid_argument);
    EXPECT_THROW(lower_bound(s, 36, Rational(0)), std::invalid_argument);
    BoundReport r = lower_bound(s, 36, Rational(84));
    ASSERT_TRUE(r.memory_dependent.has_value());
    EXPECT_NEAR(static_cast<double>(r.memory_dependent->value()), 2.0 * 96 * 24 * 6 / (36 * std::sqrt(84.0)), 1e-9);
    EXPECT_EQ(r.binding, Binding::MemoryIndependent);
}

TEST(Memory, SmallMemoryInThreeDWindowBinds) {
    // large P with memory just above the owned data: 2mnk/(P sqrt M) wins
    ProblemShape s{1000, 1000, 1000};
    Dim P = 1000;
    Rational M = owned_data(s, P);
    DominanceVerdict v = bound_dominance(s, P, M);
    EXPECT_TRUE(v.in_window);
    EXPECT_TRUE(v.memory_dependent_dominates);
    EXPECT_EQ(lower_bound(s, P, M).binding, Binding::MemoryDependent);
}

TEST(MemoryProperty, IndependentDominatesThroughTwoD) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<Dim> dim(1, 2000);
    for (int i = 0; i < 3000; ++i) {
        ProblemShape s{dim(rng), dim(rng), dim(rng)};
        Dim limit = static_cast<Dim>(int128{s.m()} * s.n() / (int128{s.k()} * s.k()));
        limit = std::max<Dim>(1, std::min<Dim>(limit, 1000000));
        Dim P = std::uniform_int_distribution<Dim>(1, limit)(rng);
        Rational owned = owned_data(s, P);
        Rational M = owned * Rational(std::uniform_int_distribution<Dim>(100, 10000)(rng), 100);
        DominanceVerdict v = bound_dominance(s, P, M);
        ASSERT_FALSE(v.memory_dependent_dominates) << s.n1() << " " << s.n2() << " " << s.n3() << " P=" << P;
        ASSERT_FALSE(v.in_window);
    }
}

TEST(Memory, DominanceAtLargeSizesDoesNotOverflow) {
    ProblemShape s{100000, 90000, 80000};
    for (Dim P : {Dim{1}, Dim{7}, Dim{1000000}}) {
        Rational M = owned_data(s, P) * Rational(37, 10);
        DominanceVerdict v = bound_dominance(s, P, M);
        long double cap = 8.0L / 27.0L * static_cast<long double>(s.volume()) / std::pow(M.to_long_double(), 1.5L);
        bool past_2d = int128{P} * s.k() * s.k() > int128{s.m()} * s.n();
        EXPECT_EQ(v.in_window, past_2d && P <= cap);
    }
}

TEST(MachineModel, LinearCost) {
    MachineModel mm{1, 2, 3};
    EXPECT_EQ(mm.time(1, 1, 1), 6);
    EXPECT_THROW(MachineModel(-1, 0, 0), std::invalid_argument);
}

TEST(PriorConstants, TableValues) {
    ConstantsRow three = prior_constants(RegimeKind::ThreeD);
    EXPECT_NEAR(static_cast<double>(*three.constants[0].value), std::pow(0.5, 2.0 / 3.0), 1e-15);
    EXPECT_EQ(*three.constants[1].value, 0.5L);
    EXPECT_EQ(*three.constants[2].value, 1.0L);
    EXPECT_EQ(*three.constants[3].value, 3.0L);
    ConstantsRow two = prior_constants(RegimeKind::TwoD);
    EXPECT_FALSE(two.constants[0].value.has_value());
    EXPECT_FALSE(two.constants[1].value.has_value());
    EXPECT_NEAR(static_cast<double>(*two.constants[2].value), std::sqrt(2.0 / 3.0), 1e-15);
    EXPECT_EQ(*two.constants[3].value, 2.0L);
    ConstantsRow one = prior_constants(RegimeKind::OneD);
    EXPECT_EQ(*one.constants[2].value, 0.64L);
    EXPECT_EQ(*one.constants[3].value, 1.0L);
}
