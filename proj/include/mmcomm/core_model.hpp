#pragma once

// Problem data model and closed-form memory-independent communication
// lower bounds for classical parallel matrix multiplication.
//
// A is n1 x n2, B is n2 x n3, C = A*B is n1 x n3. The bounds depend only on
// the sorted dimensions m >= n >= k and the processor count P, and fall into
// three regimes split at P = m/n and P = mn/k^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "mmcomm/quantity.hpp"
#include "mmcomm/rational.hpp"

namespace mmcomm {

using Dim = std::int64_t;

class ProblemShape {
public:
    ProblemShape(Dim n1, Dim n2, Dim n3) : dims_{n1, n2, n3} {
        for (int axis = 0; axis < 3; ++axis) {
            if (dims_[axis] <= 0)
                throw std::invalid_argument("mmcomm: dimension n" + std::to_string(axis + 1) +
                                            " must be positive, got " + std::to_string(dims_[axis]));
        }
        sorted_axis_ = {0, 1, 2};
        // descending by size; ties keep axis order
        std::stable_sort(sorted_axis_.begin(), sorted_axis_.end(),
                         [&](int a, int b) { return dims_[a] > dims_[b]; });
    }

    Dim n1() const noexcept { return dims_[0]; }
    Dim n2() const noexcept { return dims_[1]; }
    Dim n3() const noexcept { return dims_[2]; }
    Dim dim(int axis) const { return dims_.at(axis); }

    Dim m() const noexcept { return dims_[sorted_axis_[0]]; }
    Dim n() const noexcept { return dims_[sorted_axis_[1]]; }
    Dim k() const noexcept { return dims_[sorted_axis_[2]]; }

    // Axis (0, 1, 2 for n1, n2, n3) holding the rank-th largest dimension.
    int sorted_axis(int rank) const { return sorted_axis_.at(rank); }

    // n1 n2 + n2 n3 + n1 n3, the size of A, B and C together.
    int128 pairwise_sum() const {
        return int128{dims_[0]} * dims_[1] + int128{dims_[1]} * dims_[2] +
               int128{dims_[0]} * dims_[2];
    }

    int128 volume() const { return int128{dims_[0]} * dims_[1] * dims_[2]; }

    friend bool operator==(const ProblemShape& a, const ProblemShape& b) { return a.dims_ == b.dims_; }

private:
    std::array<Dim, 3> dims_;
    std::array<int, 3> sorted_axis_;
};

enum class RegimeKind { OneD, TwoD, ThreeD };

inline std::string to_string(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::OneD: return "1D";
        case RegimeKind::TwoD: return "2D";
        case RegimeKind::ThreeD: return "3D";
    }
    return "?";
}

// Boundary values of P belong to both adjacent regimes; `tag` keeps the
// lower-indexed one and `on_boundary` records the coincidence.
struct Regime {
    RegimeKind tag = RegimeKind::OneD;
    bool on_boundary = false;

    friend bool operator==(const Regime&, const Regime&) = default;
};

enum class Binding { MemoryIndependent, MemoryDependent };

inline std::string to_string(Binding b) {
    return b == Binding::MemoryIndependent ? "memory-independent" : "memory-dependent";
}

struct BoundReport {
    ProblemShape shape;
    Dim procs;
    Regime regime;
    // Minimum data one processor must touch (D).
    Quantity accessed;
    // (mn + mk + nk) / P, data a processor may already own.
    Rational owned;
    // max(0, accessed - owned)
    Quantity lower_bound;
    std::optional<Rational> memory;
    // 2mnk / (P sqrt(M)), only when a memory size is given.
    std::optional<Quantity> memory_dependent;
    std::optional<Binding> binding;
    // Set when P > mnk: fewer than one multiplication per processor.
    bool exceeds_work = false;
};

struct MachineModel {
    long double alpha = 0;  // per message
    long double beta = 0;   // per word
    long double gamma = 0;  // per flop

    MachineModel() = default;
    MachineModel(long double a, long double b, long double g) : alpha(a), beta(b), gamma(g) {
        if (a < 0 || b < 0 || g < 0) throw std::invalid_argument("mmcomm: machine costs must be nonnegative");
    }

    long double time(long double messages, long double words, long double flops) const {
        return alpha * messages + beta * words + gamma * flops;
    }
};

namespace detail {

inline void require_procs(Dim procs) {
    if (procs < 1) throw std::invalid_argument("mmcomm: processor count must be >= 1, got " + std::to_string(procs));
}

}  // namespace detail

inline Regime classify_regime(Dim m, Dim n, Dim k, Dim procs) {
    detail::require_procs(procs);
    if (!(m >= n && n >= k && k >= 1)) throw std::invalid_argument("mmcomm: expected m >= n >= k >= 1");
    // P vs m/n and P vs mn/k^2, compared as integers
    int128 pn = int128{procs} * n;
    if (pn < m) return {RegimeKind::OneD, false};
    if (pn == m) return {RegimeKind::OneD, true};
    int128 pk2 = int128{procs} * k * k;
    int128 mn = int128{m} * n;
    if (pk2 < mn) return {RegimeKind::TwoD, false};
    if (pk2 == mn) return {RegimeKind::TwoD, true};
    return {RegimeKind::ThreeD, false};
}

inline Regime classify_regime(const ProblemShape& shape, Dim procs) {
    return classify_regime(shape.m(), shape.n(), shape.k(), procs);
}

// D for a given regime's formula, whether or not P lies in that regime.
inline Quantity accessed_data_formula(RegimeKind kind, Dim m, Dim n, Dim k, Dim procs) {
    detail::require_procs(procs);
    const Rational P{procs};
    const Rational mn = Rational{int128{m} * n};
    const Rational mk = Rational{int128{m} * k};
    const Rational nk = Rational{int128{n} * k};
    switch (kind) {
        case RegimeKind::OneD:
            return (mn + mk) / P + nk;
        case RegimeKind::TwoD:
            return Quantity{2} * sqrt(mn * Rational{int128{k} * k} / P) + Quantity{mn / P};
        case RegimeKind::ThreeD:
            return Quantity{3} * pow_two_thirds(mn * Rational{k} / P);
    }
    throw std::logic_error("mmcomm: unknown regime");
}

inline Quantity accessed_data(const ProblemShape& shape, Dim procs) {
    return accessed_data_formula(classify_regime(shape, procs).tag, shape.m(), shape.n(), shape.k(), procs);
}

inline Rational owned_data(const ProblemShape& shape, Dim procs) {
    detail::require_procs(procs);
    return Rational{shape.pairwise_sum(), procs};
}

// 2mnk / (P sqrt(M)), the leading term of the memory-dependent bound.
inline Quantity memory_dependent_term(const ProblemShape& shape, Dim procs, const Rational& memory) {
    detail::require_procs(procs);
    if (memory.sign() <= 0) throw std::invalid_argument("mmcomm: memory size must be positive");
    Rational scaled = Rational{2} * Rational{shape.volume()} / Rational{procs};
    return Quantity{scaled} / sqrt(memory);
}

inline void require_feasible_memory(const ProblemShape& shape, Dim procs, const Rational& memory) {
    Rational owned = owned_data(shape, procs);
    if (memory < owned)
        throw std::invalid_argument("mmcomm: local memory " + memory.to_decimal() +
                                    " cannot hold the inputs and output, which need " + owned.to_decimal() +
                                    " words per processor");
}

inline BoundReport lower_bound(const ProblemShape& shape, Dim procs, std::optional<Rational> memory = std::nullopt) {
    detail::require_procs(procs);
    Regime regime = classify_regime(shape, procs);
    Quantity accessed = accessed_data_formula(regime.tag, shape.m(), shape.n(), shape.k(), procs);
    Rational owned = owned_data(shape, procs);
    Quantity bound = max(accessed - Quantity{owned}, Quantity{0});

    BoundReport report{.shape = shape, .procs = procs, .regime = regime, .accessed = accessed, .owned = owned, .lower_bound = bound};
    report.exceeds_work = int128{procs} > shape.volume();
    if (memory) {
        require_feasible_memory(shape, procs, *memory);
        report.memory = memory;
        report.memory_dependent = memory_dependent_term(shape, procs, *memory);
        report.binding = compare(*report.memory_dependent, accessed) > 0 ? Binding::MemoryDependent
                                                                        : Binding::MemoryIndependent;
    }
    return report;
}

// 3n^2/P^(2/3) - 3n^2/P
inline BoundReport square_bound(Dim n, Dim procs) { return lower_bound(ProblemShape{n, n, n}, procs); }

struct DominanceVerdict {
    Quantity memory_independent;  // D
    Quantity memory_dependent;    // 2mnk / (P sqrt(M))
    bool memory_dependent_dominates = false;
    // mn/k^2 < P <= (8/27) mnk / M^(3/2)
    bool in_window = false;
};

inline DominanceVerdict bound_dominance(const ProblemShape& shape, Dim procs, const Rational& memory) {
    require_feasible_memory(shape, procs, memory);
    Quantity independent = accessed_data(shape, procs);
    Quantity dependent = memory_dependent_term(shape, procs, memory);

    const Dim m = shape.m(), n = shape.n(), k = shape.k();
    bool past_2d = int128{procs} * k * k > int128{m} * n;
    // P <= (8/27) mnk / M^(3/2)  <=>  729 P^2 M^3 <= 64 (mnk)^2
    bool below_cap = false;
    try {
        Rational lhs = Rational{729} * Rational{procs} * Rational{procs} * memory * memory * memory;
        Rational rhs = Rational{64} * Rational{shape.volume()} * Rational{shape.volume()};
        below_cap = lhs <= rhs;
    } catch (const std::overflow_error&) {
        long double cap = 8.0L / 27.0L * static_cast<long double>(shape.volume()) /
                          std::pow(memory.to_long_double(), 1.5L);
        below_cap = static_cast<long double>(procs) <= cap;
    }
    return {independent, dependent, compare(dependent, independent) > 0, past_2d && below_cap};
}

struct PriorConstant {
    std::string source;
    std::optional<long double> value;  // absent when that work gives no bound here
    std::string expression;
};

struct ConstantsRow {
    RegimeKind regime;
    std::string leading_term;
    std::array<PriorConstant, 4> constants;  // ACS90, ITT04, DE+13, tight
};

// Leading-term constants of earlier memory-independent bounds next to the
// tight ones.
inline ConstantsRow prior_constants(RegimeKind regime) {
    switch (regime) {
        case RegimeKind::OneD:
            return {regime, "nk",
                    {{{"ACS90", std::nullopt, "-"},
                      {"ITT04", std::nullopt, "-"},
                      {"DE+13", 16.0L / 25.0L, "16/25"},
                      {"tight", 1.0L, "1"}}}};
        case RegimeKind::TwoD:
            return {regime, "(mnk^2/P)^(1/2)",
                    {{{"ACS90", std::nullopt, "-"},
                      {"ITT04", std::nullopt, "-"},
                      {"DE+13", std::sqrt(2.0L / 3.0L), "(2/3)^(1/2)"},
                      {"tight", 2.0L, "2"}}}};
        case RegimeKind::ThreeD:
            return {regime, "(mnk/P)^(2/3)",
                    {{{"ACS90", std::cbrt(0.25L), "(1/2)^(2/3)"},
                      {"ITT04", 0.5L, "1/2"},
                      {"DE+13", 1.0L, "1"},
                      {"tight", 3.0L, "3"}}}};
    }
    throw std::logic_error("mmcomm: unknown regime");
}

}  // namespace mmcomm
