#pragma once

// Analytic solution and KKT certification of the projection-size problem
//
//   minimize    x1 + x2 + x3
//   subject to  (mnk/P)^2 <= x1 x2 x3,
//               nk/P <= x1,  mk/P <= x2,  mn/P <= x3,
//
// whose optimum is the accessed-data term D. x1, x2, x3 are the projection
// sizes onto the smallest, middle and largest matrix.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include "mmcomm/core_model.hpp"

namespace mmcomm {

using Vec3 = std::array<long double, 3>;
using Vec4 = std::array<long double, 4>;

struct OptProblem {
    Dim m = 1, n = 1, k = 1;
    Dim procs = 1;

    // Dimensions must already be sorted m >= n >= k >= 1.
    static OptProblem make(Dim m, Dim n, Dim k, Dim procs) {
        if (!(m >= n && n >= k && k >= 1))
            throw std::invalid_argument("mmcomm: optimization problem needs m >= n >= k >= 1, got (" +
                                        std::to_string(m) + "," + std::to_string(n) + "," +
                                        std::to_string(k) + ")");
        detail::require_procs(procs);
        return {m, n, k, procs};
    }

    static OptProblem from_shape(const ProblemShape& shape, Dim procs) {
        return make(shape.m(), shape.n(), shape.k(), procs);
    }

    long double volume_per_proc() const {
        return static_cast<long double>(int128{m} * n * k) / static_cast<long double>(procs);
    }

    // Right-hand sides of the three individual constraints.
    Vec3 floors() const {
        long double P = static_cast<long double>(procs);
        return {static_cast<long double>(int128{n} * k) / P, static_cast<long double>(int128{m} * k) / P,
                static_cast<long double>(int128{m} * n) / P};
    }
};

struct OptSolution {
    Vec3 x{};
    Vec4 mu{};
    int case_tag = 0;

    long double objective() const { return x[0] + x[1] + x[2]; }
};

struct KKTReport {
    bool primal_feasible = false;
    bool dual_feasible = false;
    bool stationary = false;
    bool complementary = false;
    long double primal_residual = 0;
    long double dual_residual = 0;
    long double stationarity_residual = 0;
    long double slackness_residual = 0;

    bool all() const { return primal_feasible && dual_feasible && stationary && complementary; }

    // Name of the first failing condition, or empty.
    std::string first_failure() const {
        if (!primal_feasible) return "primal feasibility";
        if (!dual_feasible) return "dual feasibility";
        if (!stationary) return "stationarity";
        if (!complementary) return "complementary slackness";
        return {};
    }
};

inline constexpr long double kFeasibilityRelTol = 1e-12L;
inline constexpr long double kStationarityRelTol = 1e-9L;

// Case whose range contains P; boundaries go to the lower case.
inline int solution_case(const OptProblem& p) {
    switch (classify_regime(p.m, p.n, p.k, p.procs).tag) {
        case RegimeKind::OneD: return 1;
        case RegimeKind::TwoD: return 2;
        case RegimeKind::ThreeD: return 3;
    }
    return 0;
}

// Primal point and dual vector of one case's closed form, evaluated at P
// even when P lies outside that case's range.
inline OptSolution case_solution(const OptProblem& p, int case_tag) {
    const long double m = p.m, n = p.n, k = p.k, P = p.procs;
    OptSolution s;
    s.case_tag = case_tag;
    switch (case_tag) {
        case 1:
            s.x = {n * k, m * k / P, m * n / P};
            s.mu = {P * P / (m * m * n * k), 0, 1 - P * n / m, 1 - P * k / m};
            break;
        case 2: {
            long double side = std::sqrt(m * n / P) * k;  // (mnk^2/P)^(1/2)
            s.x = {side, side, m * n / P};
            s.mu = {std::pow(P / (m * n), 1.5L) / k, 0, 0, 1 - std::sqrt(P / (m * n)) * k};
            break;
        }
        case 3: {
            long double c = std::cbrt(p.volume_per_proc());
            s.x = {c * c, c * c, c * c};
            s.mu = {1 / (c * c * c * c), 0, 0, 0};  // (P/mnk)^(4/3)
            break;
        }
        default:
            throw std::invalid_argument("mmcomm: case tag must be 1, 2 or 3");
    }
    return s;
}

inline OptSolution analytic_solution(const OptProblem& p) { return case_solution(p, solution_case(p)); }

// Optimal objective, exact where the closed form is rational.
inline Quantity analytic_objective(const OptProblem& p) {
    RegimeKind kind = classify_regime(p.m, p.n, p.k, p.procs).tag;
    return accessed_data_formula(kind, p.m, p.n, p.k, p.procs);
}

inline Vec4 constraint_values(const OptProblem& p, const Vec3& x) {
    long double v = p.volume_per_proc();
    Vec3 lo = p.floors();
    return {v * v - x[0] * x[1] * x[2], lo[0] - x[0], lo[1] - x[1], lo[2] - x[2]};
}

inline std::array<Vec3, 4> constraint_jacobian(const Vec3& x) {
    return {{{-x[1] * x[2], -x[0] * x[2], -x[0] * x[1]}, {-1, 0, 0}, {0, -1, 0}, {0, 0, -1}}};
}

// Checks the four KKT conditions at (sol.x, sol.mu).
//
// Primal feasibility is judged per constraint relative to its magnitude at
// kFeasibilityRelTol, dual feasibility absolutely at the same tolerance.
// Stationarity is |grad f + mu J| / |grad f|; complementary slackness is
// max |mu_i g_i| over the objective value; both are held to `tol`.
inline KKTReport kkt_verify(const OptProblem& p, const OptSolution& sol, long double tol = kStationarityRelTol) {
    if (!(tol > 0)) throw std::invalid_argument("mmcomm: tolerance must be positive");
    KKTReport r;
    Vec4 g = constraint_values(p, sol.x);
    long double v = p.volume_per_proc();
    Vec3 lo = p.floors();
    Vec4 scale = {v * v, lo[0], lo[1], lo[2]};

    for (int i = 0; i < 4; ++i) r.primal_residual = std::max(r.primal_residual, std::max(0.0L, g[i]) / scale[i]);
    r.primal_feasible = r.primal_residual <= kFeasibilityRelTol;

    for (long double mu : sol.mu) r.dual_residual = std::max(r.dual_residual, std::max(0.0L, -mu));
    r.dual_feasible = r.dual_residual <= kFeasibilityRelTol;

    auto jac = constraint_jacobian(sol.x);
    Vec3 grad = {1, 1, 1};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) grad[j] += sol.mu[i] * jac[i][j];
    r.stationarity_residual =
        std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]) / std::sqrt(3.0L);
    r.stationary = r.stationarity_residual <= tol;

    long double f = std::fabs(sol.objective());
    for (int i = 0; i < 4; ++i)
        r.slackness_residual = std::max(r.slackness_residual, std::fabs(sol.mu[i] * g[i]) / f);
    r.complementary = r.slackness_residual <= tol;
    return r;
}

struct OracleResult {
    long double objective = 0;
    Vec3 x{};
    std::size_t evaluations = 0;
};

// Brute-force minimum over feasible points, independent of the closed forms.
//
// Searches (x1, x2) on a log-spaced grid between the individual floors and
// mn + mk + nk (no optimal coordinate can exceed the objective of the
// feasible corner (nk, mk, mn)), with x3 set to the smallest feasible value.
// Half the budget goes to the global grid, the rest to successive zooms
// around the incumbent. Every evaluated point is feasible, so the result is
// never below the true optimum beyond rounding.
inline OracleResult numeric_minimize_oracle(const OptProblem& p, std::size_t budget = 100000) {
    if (budget < 1000) throw std::invalid_argument("mmcomm: oracle budget must be at least 1000 samples");
    Vec3 lo = p.floors();
    long double vv = p.volume_per_proc() * p.volume_per_proc();
    long double hi = static_cast<long double>(int128{p.m} * p.n + int128{p.m} * p.k + int128{p.n} * p.k);
    if (!(lo[0] <= hi && lo[1] <= hi)) throw std::logic_error("mmcomm: empty feasible region");

    OracleResult best;
    best.objective = std::numeric_limits<long double>::infinity();
    auto eval = [&](long double x1, long double x2) {
        long double x3 = std::max(lo[2], vv / (x1 * x2));
        ++best.evaluations;
        long double f = x1 + x2 + x3;
        if (f < best.objective) {
            best.objective = f;
            best.x = {x1, x2, x3};
        }
    };

    // grid over [log a1, log b1] x [log a2, log b2]
    auto sweep = [&](long double a1, long double b1, long double a2, long double b2, std::size_t side) {
        for (std::size_t i = 0; i < side; ++i) {
            long double t1 = side == 1 ? 0 : static_cast<long double>(i) / (side - 1);
            long double x1 = std::exp(a1 + (b1 - a1) * t1);
            for (std::size_t j = 0; j < side; ++j) {
                long double t2 = side == 1 ? 0 : static_cast<long double>(j) / (side - 1);
                eval(x1, std::exp(a2 + (b2 - a2) * t2));
            }
        }
    };

    const long double la1 = std::log(lo[0]), la2 = std::log(lo[1]), lhi = std::log(hi);
    std::size_t global_side = static_cast<std::size_t>(std::sqrt(static_cast<long double>(budget / 2)));
    sweep(la1, lhi, la2, lhi, global_side);

    constexpr int kRounds = 8;
    std::size_t zoom_side = static_cast<std::size_t>(std::sqrt(static_cast<long double>((budget - best.evaluations) / kRounds)));
    long double step1 = (lhi - la1) / (global_side - 1);
    long double step2 = (lhi - la2) / (global_side - 1);
    for (int round = 0; round < kRounds && zoom_side >= 3; ++round) {
        long double c1 = std::log(best.x[0]), c2 = std::log(best.x[1]);
        long double a1 = std::max(la1, c1 - 2 * step1), b1 = std::min(lhi, c1 + 2 * step1);
        long double a2 = std::max(la2, c2 - 2 * step2), b2 = std::min(lhi, c2 + 2 * step2);
        sweep(a1, b1, a2, b2, zoom_side);
        step1 = (b1 - a1) / (zoom_side - 1);
        step2 = (b2 - a2) / (zoom_side - 1);
    }
    return best;
}

struct QuasiconvexViolation {
    Vec3 x{};
    Vec3 y{};
    long double inner_product = 0;
};

struct QuasiconvexityReport {
    std::size_t pairs = 0;
    std::size_t antecedent_held = 0;  // pairs with g0(y) <= g0(x)
    std::size_t violations = 0;
    std::optional<QuasiconvexViolation> first_violation;

    bool passed() const { return violations == 0; }
};

// Tests g0(y) <= g0(x)  =>  <grad g0(x), y - x> <= 0  for g0 = L - x1 x2 x3.
// The inner product is compared against a tolerance scaled by its terms.
inline bool quasiconvex_pair_holds(const Vec3& x, const Vec3& y, long double* inner = nullptr) {
    long double px = x[0] * x[1] * x[2];
    long double py = y[0] * y[1] * y[2];
    long double ip = 3 * px - y[0] * x[1] * x[2] - x[0] * y[1] * x[2] - x[0] * x[1] * y[2];
    if (inner) *inner = ip;
    if (py < px) return true;  // antecedent false
    long double scale = 3 * px + y[0] * x[1] * x[2] + x[0] * y[1] * x[2] + x[0] * x[1] * y[2];
    return ip <= 64 * std::numeric_limits<long double>::epsilon() * scale;
}

// Random pairs in the positive octant, log-uniform over [1e-3, 1e3].
inline QuasiconvexityReport quasiconvexity_check(std::size_t count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("mmcomm: need at least one sample pair");
    std::mt19937_64 rng(seed);
    auto coord = [&] {
        long double u = static_cast<long double>(rng()) / static_cast<long double>(std::mt19937_64::max());
        return std::pow(10.0L, -3.0L + 6.0L * u);
    };
    QuasiconvexityReport rep;
    for (std::size_t i = 0; i < count; ++i) {
        Vec3 x{coord(), coord(), coord()};
        Vec3 y{coord(), coord(), coord()};
        ++rep.pairs;
        if (y[0] * y[1] * y[2] >= x[0] * x[1] * x[2]) ++rep.antecedent_held;
        long double ip = 0;
        if (!quasiconvex_pair_holds(x, y, &ip)) {
            ++rep.violations;
            if (!rep.first_violation) rep.first_violation = QuasiconvexViolation{x, y, ip};
        }
    }
    return rep;
}

}  // namespace mmcomm
