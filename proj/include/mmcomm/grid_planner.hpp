#pragma once

// Communication cost of the grid-based 3D algorithm for any p1 x p2 x p3
// processor grid, the closed-form optimal grid, and an exhaustive search
// over factor triples that confirms it.

#include <algorithm>
#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmcomm/core_model.hpp"
#include "mmcomm/quantity.hpp"
#include "mmcomm/rational.hpp"

namespace mmcomm {

// p1 splits rows of A and C (n1), p2 the contraction dimension (n2),
// p3 the columns of B and C (n3).
struct ProcessorGrid {
    Dim p1 = 1, p2 = 1, p3 = 1;

    Dim procs() const noexcept { return p1 * p2 * p3; }
    Dim operator[](int axis) const { return axis == 0 ? p1 : (axis == 1 ? p2 : p3); }

    bool divides(const ProblemShape& s) const {
        return s.n1() % p1 == 0 && s.n2() % p2 == 0 && s.n3() % p3 == 0;
    }

    std::string to_string() const {
        return std::to_string(p1) + "x" + std::to_string(p2) + "x" + std::to_string(p3);
    }

    friend auto operator<=>(const ProcessorGrid&, const ProcessorGrid&) = default;
};

// Per-processor words for each collective of the algorithm.
struct CostBreakdown {
    Rational words_a;  // All-Gather of A over (p1', p2', :)
    Rational words_b;  // All-Gather of B over (:, p2', p3')
    Rational words_c;  // Reduce-Scatter of C over (p1', :, p3')
    Rational total;    // face-block sizes minus owned data
    Rational owned;    // (n1n2 + n2n3 + n1n3) / P

    Rational collective_sum() const { return words_a + words_b + words_c; }
    // Words a processor touches: the three face blocks.
    Rational accessed() const { return total + owned; }
};

inline CostBreakdown comm_cost(const ProblemShape& s, const ProcessorGrid& g) {
    if (g.p1 < 1 || g.p2 < 1 || g.p3 < 1) throw std::invalid_argument("mmcomm: grid factors must be >= 1");
    const Rational a_block{int128{s.n1()} * s.n2(), int128{g.p1} * g.p2};
    const Rational b_block{int128{s.n2()} * s.n3(), int128{g.p2} * g.p3};
    const Rational c_block{int128{s.n1()} * s.n3(), int128{g.p1} * g.p3};
    const Rational one{1};

    CostBreakdown c;
    c.words_a = (one - Rational{1, g.p3}) * a_block;
    c.words_b = (one - Rational{1, g.p1}) * b_block;
    c.words_c = (one - Rational{1, g.p2}) * c_block;
    c.owned = Rational{s.pairwise_sum(), g.procs()};
    c.total = a_block + b_block + c_block - c.owned;
    return c;
}

struct AnalyticGrid {
    Regime regime;
    // Factors aligned to (n1, n2, n3); approximate when irrational.
    std::array<Quantity, 3> factors{Quantity{1}, Quantity{1}, Quantity{1}};
    // Set only when every factor is an integer.
    std::optional<ProcessorGrid> grid;
    // Axes (0-based, aligned to n1, n2, n3) whose factor is not an integer.
    std::vector<int> fractional_axes;

    bool integral() const { return grid.has_value(); }
};

// Closed-form optimal grid: 1D puts all of P on the largest dimension, 2D
// balances the two largest (m/p = n/q), 3D balances all three
// (m/p = n/q = k/r). Non-integral factors are reported, never rounded.
inline AnalyticGrid analytic_grid(const ProblemShape& s, Dim procs) {
    AnalyticGrid out;
    out.regime = classify_regime(s, procs);
    const Rational P{procs};
    const Rational m{s.m()}, n{s.n()}, k{s.k()};

    // sorted factors p >= q >= r for m, n, k
    std::array<Quantity, 3> sorted{Quantity{1}, Quantity{1}, Quantity{1}};
    switch (out.regime.tag) {
        case RegimeKind::OneD:
            sorted[0] = P;
            break;
        case RegimeKind::TwoD:
            sorted[0] = sqrt(P * m / n);
            sorted[1] = sqrt(P * n / m);
            break;
        case RegimeKind::ThreeD:
            sorted[0] = cbrt(P * m * m / (n * k));
            sorted[1] = cbrt(P * n * n / (m * k));
            sorted[2] = cbrt(P * k * k / (m * n));
            break;
    }

    std::array<Dim, 3> ints{1, 1, 1};
    for (int rank = 0; rank < 3; ++rank) {
        int axis = s.sorted_axis(rank);
        out.factors[axis] = sorted[rank];
        const auto& e = sorted[rank].exact();
        if (e && e->is_integer())
            ints[axis] = static_cast<Dim>(e->numerator());
        else
            out.fractional_axes.push_back(axis);
    }
    std::sort(out.fractional_axes.begin(), out.fractional_axes.end());
    if (out.fractional_axes.empty()) out.grid = ProcessorGrid{ints[0], ints[1], ints[2]};
    return out;
}

// All ordered (p1, p2, p3) with p1 p2 p3 = P, lexicographic order.
inline std::vector<ProcessorGrid> factor_triples(Dim procs) {
    detail::require_procs(procs);
    std::vector<Dim> divisors;
    for (Dim d = 1; d * d <= procs; ++d) {
        if (procs % d == 0) {
            divisors.push_back(d);
            if (d != procs / d) divisors.push_back(procs / d);
        }
    }
    std::sort(divisors.begin(), divisors.end());
    std::vector<ProcessorGrid> out;
    for (Dim a : divisors) {
        for (Dim b : divisors) {
            if ((procs / a) % b != 0) continue;
            out.push_back({a, b, procs / a / b});
        }
    }
    return out;
}

struct GridChoice {
    ProcessorGrid grid;
    CostBreakdown cost;
};

// Minimum-cost factor triple. Ties go to the lexicographically largest
// (p1, p2, p3), which favours splitting n1 first.
inline GridChoice exhaustive_grid(const ProblemShape& s, Dim procs, bool require_divisibility = false) {
    std::optional<GridChoice> best;
    for (const auto& g : factor_triples(procs)) {
        if (require_divisibility && !g.divides(s)) continue;
        CostBreakdown c = comm_cost(s, g);
        if (!best || c.total < best->cost.total || (c.total == best->cost.total && g > best->grid))
            best = GridChoice{g, c};
    }
    if (!best)
        throw std::invalid_argument("mmcomm: no factor triple of P=" + std::to_string(procs) +
                                    " divides the dimensions (" + std::to_string(s.n1()) + "," +
                                    std::to_string(s.n2()) + "," + std::to_string(s.n3()) + ")");
    return *best;
}

}  // namespace mmcomm
