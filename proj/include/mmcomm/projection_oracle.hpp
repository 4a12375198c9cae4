#pragma once

// Brute-force checks, at toy scale, of the lattice facts behind the bound:
// Loomis-Whitney, the per-matrix access floor for a processor doing at
// least 1/P of the work, and the minimum total projection size over every
// such work assignment.
//
// Lattice points are 0-based: 0 <= i_d < n_d.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmcomm/core_model.hpp"
#include "mmcomm/grid_planner.hpp"

namespace mmcomm {

struct LatticePoint {
    Dim i1 = 0, i2 = 0, i3 = 0;

    friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
};

// A set of scalar multiplications (i1, i2, i3) assigned to one processor.
class WorkSet {
public:
    WorkSet(const ProblemShape& shape, std::vector<LatticePoint> points) : shape_(shape), points_(std::move(points)) {
        for (const auto& p : points_) {
            if (p.i1 < 0 || p.i1 >= shape.n1() || p.i2 < 0 || p.i2 >= shape.n2() || p.i3 < 0 || p.i3 >= shape.n3())
                throw std::invalid_argument("mmcomm: lattice point (" + std::to_string(p.i1) + "," +
                                            std::to_string(p.i2) + "," + std::to_string(p.i3) +
                                            ") lies outside the iteration space");
        }
        std::vector<LatticePoint> sorted = points_;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("mmcomm: duplicate lattice point in work set");
    }

    const ProblemShape& shape() const noexcept { return shape_; }
    const std::vector<LatticePoint>& points() const noexcept { return points_; }
    std::size_t size() const noexcept { return points_.size(); }

private:
    ProblemShape shape_;
    std::vector<LatticePoint> points_;
};

struct ProjectionCounts {
    std::size_t phi_a = 0;  // distinct (i1, i2): entries of A touched
    std::size_t phi_b = 0;  // distinct (i2, i3): entries of B touched
    std::size_t phi_c = 0;  // distinct (i1, i3): entries of C touched

    std::size_t sum() const { return phi_a + phi_b + phi_c; }
    friend bool operator==(const ProjectionCounts&, const ProjectionCounts&) = default;
};

inline ProjectionCounts projections_of(const WorkSet& f) {
    const auto& s = f.shape();
    std::vector<char> a(static_cast<std::size_t>(s.n1() * s.n2()), 0);
    std::vector<char> b(static_cast<std::size_t>(s.n2() * s.n3()), 0);
    std::vector<char> c(static_cast<std::size_t>(s.n1() * s.n3()), 0);
    ProjectionCounts out;
    for (const auto& p : f.points()) {
        auto& ca = a[static_cast<std::size_t>(p.i1 * s.n2() + p.i2)];
        auto& cb = b[static_cast<std::size_t>(p.i2 * s.n3() + p.i3)];
        auto& cc = c[static_cast<std::size_t>(p.i1 * s.n3() + p.i3)];
        out.phi_a += !ca;
        out.phi_b += !cb;
        out.phi_c += !cc;
        ca = cb = cc = 1;
    }
    return out;
}

// |F| <= phi_A phi_B phi_C
inline bool verify_loomis_whitney(const WorkSet& f) {
    ProjectionCounts pc = projections_of(f);
    return int128{static_cast<std::int64_t>(f.size())} <= int128{static_cast<std::int64_t>(pc.phi_a)} *
                                                               static_cast<std::int64_t>(pc.phi_b) *
                                                               static_cast<std::int64_t>(pc.phi_c);
}

struct ProjectionFloorCheck {
    // |F| >= n1 n2 n3 / P; otherwise the floors say nothing about F.
    bool applicable = false;
    bool a_ok = true;  // phi_A >= n1 n2 / P
    bool b_ok = true;  // phi_B >= n2 n3 / P
    bool c_ok = true;  // phi_C >= n1 n3 / P

    bool passed() const { return !applicable || (a_ok && b_ok && c_ok); }
};

inline ProjectionFloorCheck verify_projection_lb(const WorkSet& f, Dim procs) {
    detail::require_procs(procs);
    const auto& s = f.shape();
    ProjectionFloorCheck out;
    out.applicable = int128{static_cast<std::int64_t>(f.size())} * procs >= s.volume();
    if (!out.applicable) return out;
    ProjectionCounts pc = projections_of(f);
    auto at_least = [&](std::size_t phi, int128 face) {
        return int128{static_cast<std::int64_t>(phi)} * procs >= face;
    };
    out.a_ok = at_least(pc.phi_a, int128{s.n1()} * s.n2());
    out.b_ok = at_least(pc.phi_b, int128{s.n2()} * s.n3());
    out.c_ok = at_least(pc.phi_c, int128{s.n1()} * s.n3());
    return out;
}

// The brick a grid assigns to processor (i1, i2, i3).
inline WorkSet grid_work_set(const ProblemShape& s, const ProcessorGrid& g, Dim i1, Dim i2, Dim i3) {
    if (!g.divides(s)) throw std::invalid_argument("mmcomm: grid does not divide the shape");
    const Dim b1 = s.n1() / g.p1, b2 = s.n2() / g.p2, b3 = s.n3() / g.p3;
    std::vector<LatticePoint> pts;
    for (Dim a = 0; a < b1; ++a)
        for (Dim b = 0; b < b2; ++b)
            for (Dim c = 0; c < b3; ++c) pts.push_back({i1 * b1 + a, i2 * b2 + b, i3 * b3 + c});
    return WorkSet{s, std::move(pts)};
}

inline constexpr std::size_t kExhaustiveLatticeLimit = 24;

// Per subset size, extremes over every subset of the lattice.
struct SubsetSizeRow {
    std::size_t subsets = 0;
    std::size_t min_sum = std::numeric_limits<std::size_t>::max();
    std::size_t min_phi_a = std::numeric_limits<std::size_t>::max();
    std::size_t min_phi_b = std::numeric_limits<std::size_t>::max();
    std::size_t min_phi_c = std::numeric_limits<std::size_t>::max();
    std::size_t lw_violations = 0;
};

struct ExhaustiveTable {
    ProblemShape shape;
    std::vector<SubsetSizeRow> by_size;  // indexed by |F|, 0..n1 n2 n3
    std::size_t total_subsets = 0;

    std::size_t lw_violations() const {
        std::size_t v = 0;
        for (const auto& r : by_size) v += r.lw_violations;
        return v;
    }

    // Smallest |F| with |F| P >= n1 n2 n3.
    std::size_t threshold(Dim procs) const {
        int128 vol = shape.volume();
        return static_cast<std::size_t>((vol + procs - 1) / procs);
    }

    std::size_t min_sum(Dim procs) const {
        std::size_t best = std::numeric_limits<std::size_t>::max();
        for (std::size_t s = threshold(procs); s < by_size.size(); ++s) best = std::min(best, by_size[s].min_sum);
        return best;
    }

    // The per-matrix access floors hold for every qualifying subset.
    bool projection_floors_hold(Dim procs) const {
        const int128 fa = int128{shape.n1()} * shape.n2();
        const int128 fb = int128{shape.n2()} * shape.n3();
        const int128 fc = int128{shape.n1()} * shape.n3();
        for (std::size_t s = threshold(procs); s < by_size.size(); ++s) {
            const auto& r = by_size[s];
            if (int128{static_cast<std::int64_t>(r.min_phi_a)} * procs < fa) return false;
            if (int128{static_cast<std::int64_t>(r.min_phi_b)} * procs < fb) return false;
            if (int128{static_cast<std::int64_t>(r.min_phi_c)} * procs < fc) return false;
        }
        return true;
    }
};

namespace detail {

struct LatticeWalk {
    std::vector<std::size_t> cell_a, cell_b, cell_c;  // per point
    std::vector<unsigned char> cnt_a, cnt_b, cnt_c;
    std::vector<SubsetSizeRow>* rows = nullptr;
    std::size_t n = 0;
    std::size_t leaves = 0;

    void walk(std::size_t idx, std::size_t size, std::size_t pa, std::size_t pb, std::size_t pc) {
        if (idx == n) {
            auto& r = (*rows)[size];
            ++r.subsets;
            ++leaves;
            r.min_sum = std::min(r.min_sum, pa + pb + pc);
            r.min_phi_a = std::min(r.min_phi_a, pa);
            r.min_phi_b = std::min(r.min_phi_b, pb);
            r.min_phi_c = std::min(r.min_phi_c, pc);
            if (size > pa * pb * pc) ++r.lw_violations;
            return;
        }
        walk(idx + 1, size, pa, pb, pc);
        std::size_t a = cell_a[idx], b = cell_b[idx], c = cell_c[idx];
        std::size_t na = pa + (cnt_a[a]++ == 0);
        std::size_t nb = pb + (cnt_b[b]++ == 0);
        std::size_t nc = pc + (cnt_c[c]++ == 0);
        walk(idx + 1, size + 1, na, nb, nc);
        --cnt_a[a];
        --cnt_b[b];
        --cnt_c[c];
    }
};

}  // namespace detail

// Visits all 2^(n1 n2 n3) subsets, updating projection sizes incrementally.
inline ExhaustiveTable exhaustive_projection_table(const ProblemShape& s) {
    const int128 vol = s.volume();
    if (vol > static_cast<int128>(kExhaustiveLatticeLimit))
        throw std::invalid_argument("mmcomm: exhaustive mode needs n1 n2 n3 <= " +
                                    std::to_string(kExhaustiveLatticeLimit) + ", got " + detail::to_string(vol));
    const std::size_t n = static_cast<std::size_t>(vol);
    ExhaustiveTable table{s, std::vector<SubsetSizeRow>(n + 1), 0};

    detail::LatticeWalk w;
    w.n = n;
    w.rows = &table.by_size;
    w.cnt_a.assign(static_cast<std::size_t>(s.n1() * s.n2()), 0);
    w.cnt_b.assign(static_cast<std::size_t>(s.n2() * s.n3()), 0);
    w.cnt_c.assign(static_cast<std::size_t>(s.n1() * s.n3()), 0);
    for (Dim i1 = 0; i1 < s.n1(); ++i1)
        for (Dim i2 = 0; i2 < s.n2(); ++i2)
            for (Dim i3 = 0; i3 < s.n3(); ++i3) {
                w.cell_a.push_back(static_cast<std::size_t>(i1 * s.n2() + i2));
                w.cell_b.push_back(static_cast<std::size_t>(i2 * s.n3() + i3));
                w.cell_c.push_back(static_cast<std::size_t>(i1 * s.n3() + i3));
            }
    w.walk(0, 0, 0, 0, 0);
    table.total_subsets = w.leaves;
    return table;
}

enum class SearchMode { Exhaustive, Sampled };

struct MinProjectionResult {
    std::size_t minimum = 0;      // exact (exhaustive) or best found (sampled)
    std::size_t threshold = 0;    // |F| required
    bool exact = false;
    Quantity accessed{0};         // D for the same shape and P
    bool at_least_accessed = false;
    std::size_t candidates = 0;
};

namespace detail {

inline ProjectionCounts projections_of_points(const ProblemShape& s, const std::vector<LatticePoint>& pts) {
    return projections_of(WorkSet{s, pts});
}

inline std::vector<LatticePoint> all_points(const ProblemShape& s) {
    std::vector<LatticePoint> pts;
    for (Dim i1 = 0; i1 < s.n1(); ++i1)
        for (Dim i2 = 0; i2 < s.n2(); ++i2)
            for (Dim i3 = 0; i3 < s.n3(); ++i3) pts.push_back({i1, i2, i3});
    return pts;
}

}  // namespace detail

// Minimum of phi_A + phi_B + phi_C over work sets with |F| >= n1 n2 n3 / P,
// compared with D. Sampled mode draws `samples` random subsets and tries
// every brick large enough; it can refute the bound but never certify it.
inline MinProjectionResult min_projection_sum(const ProblemShape& s, Dim procs, SearchMode mode,
                                              std::uint64_t seed = 0, std::size_t samples = 2000) {
    detail::require_procs(procs);
    MinProjectionResult out;
    out.accessed = accessed_data(s, procs);
    const int128 vol = s.volume();
    out.threshold = static_cast<std::size_t>((vol + procs - 1) / procs);

    if (mode == SearchMode::Exhaustive) {
        ExhaustiveTable t = exhaustive_projection_table(s);
        out.minimum = t.min_sum(procs);
        out.exact = true;
        out.candidates = t.total_subsets;
    } else {
        if (vol > static_cast<int128>(1) << 22)
            throw std::invalid_argument("mmcomm: sampled mode is limited to 2^22 lattice points");
        auto pts = detail::all_points(s);
        const std::size_t t = out.threshold;
        std::size_t best = std::numeric_limits<std::size_t>::max();
        auto consider = [&](const std::vector<LatticePoint>& f) {
            ++out.candidates;
            best = std::min(best, detail::projections_of_points(s, f).sum());
        };

        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < samples; ++i) {
            // partial Fisher-Yates: the first t entries are a uniform t-subset
            for (std::size_t j = 0; j < t; ++j) {
                std::uniform_int_distribution<std::size_t> pick(j, pts.size() - 1);
                std::swap(pts[j], pts[pick(rng)]);
            }
            consider(std::vector<LatticePoint>(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(t)));
        }
        for (Dim a = 1; a <= s.n1(); ++a)
            for (Dim b = 1; b <= s.n2(); ++b)
                for (Dim c = 1; c <= s.n3(); ++c) {
                    if (int128{a} * b * c < static_cast<int128>(t)) continue;
                    std::vector<LatticePoint> f;
                    for (Dim x = 0; x < a && f.size() < t; ++x)
                        for (Dim y = 0; y < b && f.size() < t; ++y)
                            for (Dim z = 0; z < c && f.size() < t; ++z) f.push_back({x, y, z});
                    consider(f);
                }
        out.minimum = best;
        out.exact = false;
    }
    out.at_least_accessed = compare(Quantity{static_cast<std::int64_t>(out.minimum)}, out.accessed) >= 0;
    return out;
}

}  // namespace mmcomm
