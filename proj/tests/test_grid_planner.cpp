#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mmcomm/grid_planner.hpp"

using namespace mmcomm;

namespace {

// Words per processor counted from block sizes: every face block it
// touches minus the share of A, B and C it started with.
Rational naive_total(const ProblemShape& s, const ProcessorGrid& g) {
    Rational a{int128{s.n1()} * s.n2(), int128{g.p1} * g.p2};
    Rational b{int128{s.n2()} * s.n3(), int128{g.p2} * g.p3};
    Rational c{int128{s.n1()} * s.n3(), int128{g.p1} * g.p3};
    Rational P{g.p1 * g.p2 * g.p3};
    return a + b + c - Rational(s.pairwise_sum()) / P;
}

// Independent enumeration of (p1, p2, p3) by trial division.
std::vector<ProcessorGrid> naive_triples(Dim P) {
    std::vector<ProcessorGrid> out;
    for (Dim a = 1; a <= P; ++a)
        for (Dim b = 1; a * b <= P; ++b)
            if (P % (a * b) == 0) out.push_back({a, b, P / (a * b)});
    return out;
}

}  // namespace

TEST(CommCost, PerCollectiveWords) {
    ProblemShape s{9600, 2400, 600};
    CostBreakdown c = comm_cost(s, {12, 3, 1});
    EXPECT_EQ(c.words_a, Rational(0));  // p3 = 1: nothing to gather
    EXPECT_EQ(c.words_b, Rational(11, 12) * Rational(2400 * 600, 3));
    EXPECT_EQ(c.words_c, Rational(2, 3) * Rational(9600 * 600, 12));
    EXPECT_EQ(c.total, Rational(760000));
    EXPECT_EQ(c.collective_sum(), c.total);
    EXPECT_EQ(c.accessed(), Rational(1600000));
    EXPECT_THROW(comm_cost(s, {0, 1, 1}), std::invalid_argument);
}

TEST(CommCostProperty, CollectivesSumToFaceBlocksMinusOwned) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<Dim> dim(1, 5000), procs(1, 720);
    for (int i = 0; i < 300; ++i) {
        ProblemShape s{dim(rng), dim(rng), dim(rng)};
        for (const auto& g : factor_triples(procs(rng))) {
            CostBreakdown c = comm_cost(s, g);
            ASSERT_EQ(c.collective_sum(), c.total);
            ASSERT_EQ(c.total, naive_total(s, g));
        }
    }
}

TEST(FactorTriples, MatchesTrialDivision) {
    for (Dim P = 1; P <= 400; ++P) {
        auto t = factor_triples(P);
        auto n = naive_triples(P);
        ASSERT_EQ(std::set<ProcessorGrid>(t.begin(), t.end()), std::set<ProcessorGrid>(n.begin(), n.end()));
        ASSERT_EQ(t.size(), n.size());
        ASSERT_TRUE(std::is_sorted(t.begin(), t.end()));
    }
    EXPECT_THROW(factor_triples(0), std::invalid_argument);
}

TEST(AnalyticGrid, WorkedExamples) {
    ProblemShape s{9600, 2400, 600};
    EXPECT_EQ(analytic_grid(s, 3).grid, (ProcessorGrid{3, 1, 1}));
    EXPECT_EQ(analytic_grid(s, 36).grid, (ProcessorGrid{12, 3, 1}));
    EXPECT_EQ(analytic_grid(s, 512).grid, (ProcessorGrid{32, 8, 2}));
    for (Dim P : {3, 36, 512}) EXPECT_EQ(exhaustive_grid(s, P).cost.total, comm_cost(s, *analytic_grid(s, P).grid).total);
}

TEST(AnalyticGrid, AlignsToUnsortedAxes) {
    // the largest dimension is n3, so it receives the largest factor
    ProblemShape s{600, 2400, 9600};
    EXPECT_EQ(analytic_grid(s, 36).grid, (ProcessorGrid{1, 3, 12}));
    EXPECT_EQ(analytic_grid(s, 512).grid, (ProcessorGrid{2, 8, 32}));
}

TEST(AnalyticGrid, ReportsNonIntegralFactors) {
    AnalyticGrid g = analytic_grid(ProblemShape{7, 7, 7}, 7);
    EXPECT_FALSE(g.integral());
    EXPECT_EQ(g.fractional_axes, (std::vector<int>{0, 1, 2}));
    EXPECT_NEAR(static_cast<double>(g.factors[0].value()), std::cbrt(7.0), 1e-12);

    // 2D case with an irrational split
    AnalyticGrid h = analytic_grid(ProblemShape{96, 24, 6}, 8);
    EXPECT_EQ(h.regime.tag, RegimeKind::TwoD);
    EXPECT_FALSE(h.integral());
}

TEST(ExhaustiveGrid, TieBreakPrefersLargestTriple) {
    EXPECT_EQ(exhaustive_grid(ProblemShape{7, 7, 7}, 7).grid, (ProcessorGrid{7, 1, 1}));
    EXPECT_EQ(exhaustive_grid(ProblemShape{13, 13, 13}, 13).grid, (ProcessorGrid{13, 1, 1}));
    EXPECT_EQ(exhaustive_grid(ProblemShape{8, 8, 8}, 4).grid, (ProcessorGrid{2, 2, 1}));
}

TEST(ExhaustiveGrid, DivisibilityFilter) {
    ProblemShape s{96, 24, 6};
    GridChoice g = exhaustive_grid(s, 36, true);
    EXPECT_TRUE(g.grid.divides(s));
    EXPECT_EQ(g.grid, (ProcessorGrid{12, 3, 1}));
    EXPECT_THROW(exhaustive_grid(ProblemShape{7, 7, 7}, 4, true), std::invalid_argument);
    EXPECT_NO_THROW(exhaustive_grid(ProblemShape{7, 7, 7}, 4, false));
}

// No grid communicates less than the lower bound, and whenever the analytic
// grid is integral it is optimal and meets the bound exactly.
TEST(GridProperty, CostNeverBelowBoundAndAnalyticAttains) {
    std::mt19937_64 rng(12);
    // smooth dimensions and P so that integral analytic grids are common
    const std::vector<Dim> smooth = {1, 2, 3, 4, 6, 8, 9, 12, 16, 18, 24, 27, 32, 36, 48, 64, 72, 96, 128, 144, 256, 512};
    std::uniform_int_distribution<std::size_t> pick(0, smooth.size() - 1);
    int attained = 0;
    for (int i = 0; i < 2000; ++i) {
        ProblemShape s{smooth[pick(rng)], smooth[pick(rng)], smooth[pick(rng)]};
        Dim P = smooth[pick(rng)];
        Quantity bound = lower_bound(s, P).lower_bound;
        GridChoice best = exhaustive_grid(s, P);
        for (const auto& g : factor_triples(P)) ASSERT_GE(compare(Quantity{comm_cost(s, g).total}, bound), 0);
        AnalyticGrid a = analytic_grid(s, P);
        if (a.grid) {
            ASSERT_EQ(comm_cost(s, *a.grid).total, best.cost.total);
            ASSERT_EQ(compare(Quantity{best.cost.total}, bound), 0);
            ++attained;
        }
    }
    EXPECT_GT(attained, 100);
}

// Shapes built so that the analytic grid is integral in each regime.
TEST(GridProperty, ConstructedIntegralGridsAttainExactly) {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<Dim> f(1, 6);
    for (int i = 0; i < 300; ++i) {
        Dim r = f(rng), q = r * f(rng), p = q * f(rng);  // p >= q >= r
        Dim b = f(rng);
        ProblemShape s{p * b, q * b, r * b};
        Dim P = p * q * r;
        AnalyticGrid a = analytic_grid(s, P);
        ASSERT_TRUE(a.integral()) << p << " " << q << " " << r;
        ASSERT_EQ(*a.grid, (ProcessorGrid{p, q, r}));
        ASSERT_EQ(Quantity{comm_cost(s, *a.grid).total}.exact(), lower_bound(s, P).lower_bound.exact());
    }
}
