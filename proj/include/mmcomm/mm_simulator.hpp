#pragma once

// Logical-time simulation of the grid-based 3D matrix multiplication on
// P virtual processors.
//
// Each processor (i1, i2, i3) of a p1 x p2 x p3 grid
//   1. all-gathers its A block over fiber (i1, i2, :),
//   2. all-gathers its B block over fiber (:, i2, i3),
//   3. multiplies the two blocks locally,
//   4. reduce-scatters the product over fiber (i1, :, i3).
// Both collectives are rings, so every message is logged and word counts
// come from the log rather than from formulas.

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "mmcomm/core_model.hpp"
#include "mmcomm/grid_planner.hpp"

namespace mmcomm {

using Value = std::int64_t;

// Row-major dense integer matrix.
struct Matrix {
    Dim rows = 0;
    Dim cols = 0;
    std::vector<Value> data;

    Matrix() = default;
    Matrix(Dim r, Dim c) : rows(r), cols(c), data(static_cast<std::size_t>(r * c), 0) {}

    Value& at(Dim r, Dim c) { return data[static_cast<std::size_t>(r * cols + c)]; }
    Value at(Dim r, Dim c) const { return data[static_cast<std::size_t>(r * cols + c)]; }

    friend bool operator==(const Matrix&, const Matrix&) = default;
};

// Entries drawn uniformly-ish from [-8, 8] with mt19937_64, row by row.
inline Matrix random_matrix(Dim rows, Dim cols, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = static_cast<Value>(rng() % 17) - 8;
    return m;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("mmcomm: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (Dim i = 0; i < a.rows; ++i)
        for (Dim l = 0; l < a.cols; ++l) {
            Value x = a.at(i, l);
            for (Dim j = 0; j < b.cols; ++j) c.at(i, j) += x * b.at(l, j);
        }
    return c;
}

enum class Phase { GatherA = 0, GatherB = 1, ReduceScatterC = 2 };

inline std::string to_string(Phase p) {
    switch (p) {
        case Phase::GatherA: return "A-all-gather";
        case Phase::GatherB: return "B-all-gather";
        case Phase::ReduceScatterC: return "C-reduce-scatter";
    }
    return "?";
}

struct Message {
    std::size_t sender = 0;
    std::size_t receiver = 0;
    std::size_t words = 0;
    Phase phase = Phase::GatherA;
    std::size_t step = 0;
};

using MessageLog = std::vector<Message>;

// Splits `total` items into `parts` runs; the first total % parts runs get
// one extra item.
inline std::vector<std::size_t> even_split(std::size_t total, std::size_t parts) {
    if (parts == 0) throw std::invalid_argument("mmcomm: cannot split into zero parts");
    std::vector<std::size_t> sizes(parts, total / parts);
    for (std::size_t i = 0; i < total % parts; ++i) ++sizes[i];
    return sizes;
}

struct GatherResult {
    // Every member's copy of the concatenation local[0] ++ local[1] ++ ...
    std::vector<std::vector<Value>> gathered;
    std::vector<std::size_t> sent;
    std::vector<std::size_t> received;
};

// Ring all-gather: in step s member i forwards the piece that originated
// at member i - s to member i + 1. After p - 1 steps everyone has all
// pieces; member i has forwarded every piece except its successor's, so it
// sent w - |local[i + 1]| words.
inline GatherResult ring_all_gather(std::span<const std::size_t> fiber, std::span<const std::vector<Value>> local,
                                    Phase phase, MessageLog& log) {
    const std::size_t p = fiber.size();
    if (p == 0) throw std::invalid_argument("mmcomm: empty fiber");
    if (local.size() != p) throw std::invalid_argument("mmcomm: one local block per fiber member expected");

    // held[i][j]: member i's copy of the piece from member j
    std::vector<std::vector<std::optional<std::vector<Value>>>> held(p, std::vector<std::optional<std::vector<Value>>>(p));
    for (std::size_t i = 0; i < p; ++i) held[i][i] = local[i];

    GatherResult out;
    out.sent.assign(p, 0);
    out.received.assign(p, 0);
    for (std::size_t step = 0; step + 1 < p; ++step) {
        struct InFlight {
            std::size_t to, origin;
            std::vector<Value> data;
        };
        std::vector<InFlight> flight;
        for (std::size_t i = 0; i < p; ++i) {
            std::size_t origin = (i + p - step) % p;
            std::size_t to = (i + 1) % p;
            const auto& piece = held[i][origin];
            if (!piece) throw std::logic_error("mmcomm: ring all-gather forwarded a piece it does not hold");
            flight.push_back({to, origin, *piece});
            log.push_back({fiber[i], fiber[to], piece->size(), phase, step});
            out.sent[i] += piece->size();
            out.received[to] += piece->size();
        }
        for (auto& f : flight) held[f.to][f.origin] = std::move(f.data);
    }

    out.gathered.resize(p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < p; ++j) out.gathered[i].insert(out.gathered[i].end(), held[i][j]->begin(), held[i][j]->end());
    return out;
}

struct ReduceScatterResult {
    // shards[i]: member i's slice of the elementwise sum
    std::vector<std::vector<Value>> shards;
    std::vector<std::size_t> shard_sizes;
    std::vector<std::size_t> sent;
    std::vector<std::size_t> received;
    std::vector<std::size_t> additions;
};

// Ring reduce-scatter over equal-length addends. Shard i (of even_split)
// ends on member i. In step s member i passes its running sum of shard
// i - s - 1 to member i + 1, which adds its own contribution.
inline ReduceScatterResult ring_reduce_scatter(std::span<const std::size_t> fiber,
                                               std::span<const std::vector<Value>> addends, Phase phase,
                                               MessageLog& log) {
    const std::size_t p = fiber.size();
    if (p == 0) throw std::invalid_argument("mmcomm: empty fiber");
    if (addends.size() != p) throw std::invalid_argument("mmcomm: one addend per fiber member expected");
    const std::size_t w = addends[0].size();
    for (const auto& a : addends)
        if (a.size() != w) throw std::invalid_argument("mmcomm: reduce-scatter addends differ in length");

    ReduceScatterResult out;
    out.shard_sizes = even_split(w, p);
    std::vector<std::size_t> offset(p + 1, 0);
    for (std::size_t i = 0; i < p; ++i) offset[i + 1] = offset[i] + out.shard_sizes[i];

    std::vector<std::vector<Value>> partial(addends.begin(), addends.end());
    out.sent.assign(p, 0);
    out.received.assign(p, 0);
    out.additions.assign(p, 0);
    for (std::size_t step = 0; step + 1 < p; ++step) {
        struct InFlight {
            std::size_t to, shard;
            std::vector<Value> data;
        };
        std::vector<InFlight> flight;
        for (std::size_t i = 0; i < p; ++i) {
            std::size_t shard = (i + 2 * p - step - 1) % p;
            std::size_t to = (i + 1) % p;
            std::vector<Value> data(partial[i].begin() + static_cast<std::ptrdiff_t>(offset[shard]),
                                    partial[i].begin() + static_cast<std::ptrdiff_t>(offset[shard + 1]));
            log.push_back({fiber[i], fiber[to], data.size(), phase, step});
            out.sent[i] += data.size();
            out.received[to] += data.size();
            flight.push_back({to, shard, std::move(data)});
        }
        for (auto& f : flight) {
            for (std::size_t e = 0; e < f.data.size(); ++e) partial[f.to][offset[f.shard] + e] += f.data[e];
            out.additions[f.to] += f.data.size();
        }
    }

    out.shards.resize(p);
    for (std::size_t i = 0; i < p; ++i)
        out.shards[i].assign(partial[i].begin() + static_cast<std::ptrdiff_t>(offset[i]),
                             partial[i].begin() + static_cast<std::ptrdiff_t>(offset[i + 1]));
    return out;
}

struct ProcessorStore {
    std::vector<Value> a_piece;  // slice of A_{i1 i2}
    std::vector<Value> b_piece;  // slice of B_{i2 i3}
    std::vector<Value> c_piece;  // slice of C_{i1 i3}, filled by the run
};

// Virtual processors and their initial data. Blocks are flattened
// column-major and cut into contiguous runs, one per fiber member, so an
// evenly divisible block is spread as block columns.
struct VirtualMachine {
    ProblemShape shape;
    ProcessorGrid grid;
    std::uint64_t seed = 0;
    // Full inputs, held only to check the result.
    Matrix reference_a;
    Matrix reference_b;
    std::vector<ProcessorStore> stores;
    // False when some fiber size does not divide its block size.
    bool even_splits = true;

    std::size_t procs() const { return stores.size(); }

    std::size_t rank(Dim i1, Dim i2, Dim i3) const {
        return static_cast<std::size_t>((i1 * grid.p2 + i2) * grid.p3 + i3);
    }

    std::array<Dim, 3> coord(std::size_t r) const {
        Dim v = static_cast<Dim>(r);
        return {v / (grid.p2 * grid.p3), (v / grid.p3) % grid.p2, v % grid.p3};
    }

    Dim block_rows_a() const { return shape.n1() / grid.p1; }
    Dim block_cols_a() const { return shape.n2() / grid.p2; }
    Dim block_cols_b() const { return shape.n3() / grid.p3; }
};

namespace detail {

inline std::vector<Value> flatten_block(const Matrix& m, Dim r0, Dim c0, Dim rows, Dim cols) {
    std::vector<Value> flat;
    flat.reserve(static_cast<std::size_t>(rows * cols));
    for (Dim c = 0; c < cols; ++c)
        for (Dim r = 0; r < rows; ++r) flat.push_back(m.at(r0 + r, c0 + c));
    return flat;
}

inline std::vector<std::vector<Value>> cut(const std::vector<Value>& flat, std::size_t parts) {
    std::vector<std::vector<Value>> out;
    std::size_t at = 0;
    for (std::size_t size : even_split(flat.size(), parts)) {
        out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(at),
                         flat.begin() + static_cast<std::ptrdiff_t>(at + size));
        at += size;
    }
    return out;
}

inline void require_divides(const ProblemShape& s, const ProcessorGrid& g) {
    if (g.p1 < 1 || g.p2 < 1 || g.p3 < 1) throw std::invalid_argument("mmcomm: grid factors must be >= 1");
    for (int axis = 0; axis < 3; ++axis) {
        if (s.dim(axis) % g[axis] != 0)
            throw std::invalid_argument("mmcomm: p" + std::to_string(axis + 1) + "=" + std::to_string(g[axis]) +
                                        " does not divide n" + std::to_string(axis + 1) + "=" +
                                        std::to_string(s.dim(axis)));
    }
}

}  // namespace detail

inline VirtualMachine build_machine(const ProblemShape& shape, const ProcessorGrid& grid, std::uint64_t seed) {
    detail::require_divides(shape, grid);
    std::mt19937_64 rng(seed);
    VirtualMachine vm{shape, grid, seed, random_matrix(shape.n1(), shape.n2(), rng),
                      random_matrix(shape.n2(), shape.n3(), rng), {}, true};
    vm.stores.resize(static_cast<std::size_t>(grid.procs()));

    const Dim br1 = vm.block_rows_a(), br2 = vm.block_cols_a(), br3 = vm.block_cols_b();
    for (Dim i1 = 0; i1 < grid.p1; ++i1)
        for (Dim i2 = 0; i2 < grid.p2; ++i2) {
            auto flat = detail::flatten_block(vm.reference_a, i1 * br1, i2 * br2, br1, br2);
            if (flat.size() % static_cast<std::size_t>(grid.p3) != 0) vm.even_splits = false;
            auto pieces = detail::cut(flat, static_cast<std::size_t>(grid.p3));
            for (Dim i3 = 0; i3 < grid.p3; ++i3) vm.stores[vm.rank(i1, i2, i3)].a_piece = std::move(pieces[i3]);
        }
    for (Dim i2 = 0; i2 < grid.p2; ++i2)
        for (Dim i3 = 0; i3 < grid.p3; ++i3) {
            auto flat = detail::flatten_block(vm.reference_b, i2 * br2, i3 * br3, br2, br3);
            if (flat.size() % static_cast<std::size_t>(grid.p1) != 0) vm.even_splits = false;
            auto pieces = detail::cut(flat, static_cast<std::size_t>(grid.p1));
            for (Dim i1 = 0; i1 < grid.p1; ++i1) vm.stores[vm.rank(i1, i2, i3)].b_piece = std::move(pieces[i1]);
        }
    if (static_cast<std::size_t>(br1 * br3) % static_cast<std::size_t>(grid.p2) != 0) vm.even_splits = false;
    return vm;
}

struct PhaseStats {
    Phase phase = Phase::GatherA;
    std::size_t fiber_size = 1;
    std::size_t block_words = 0;  // w: block size each fiber gathers or reduces
    std::vector<std::size_t> sent;
    std::vector<std::size_t> received;
    std::size_t max_sent = 0;
    std::size_t max_messages = 0;  // most messages sent by one processor
    bool even = true;              // fiber size divides block size
};

struct SimReport {
    ProblemShape shape;
    ProcessorGrid grid;
    std::uint64_t seed = 0;
    std::array<PhaseStats, 3> phases;
    // Sum over phases of the per-phase maximum words sent.
    std::size_t critical_path_words = 0;
    std::vector<std::size_t> multiply_flops;
    std::vector<std::size_t> reduction_flops;
    bool correct = false;
    bool one_copy_in = false;
    bool one_copy_out = false;
    CostBreakdown predicted;
    std::size_t message_count = 0;

    std::size_t flops(std::size_t rank) const { return multiply_flops.at(rank) + reduction_flops.at(rank); }
};

struct SimOptions {
    // Test hook: perturbs one processor's local product before the
    // reduce-scatter so the correctness check must fail.
    std::optional<std::size_t> corrupt_rank;
};

inline SimReport run_algorithm(const ProblemShape& shape, const ProcessorGrid& grid, std::uint64_t seed,
                               const SimOptions& opts = {}) {
    VirtualMachine vm = build_machine(shape, grid, seed);
    const std::size_t P = vm.procs();
    const Dim br1 = vm.block_rows_a(), br2 = vm.block_cols_a(), br3 = vm.block_cols_b();
    MessageLog log;

    std::size_t a_words = 0, b_words = 0;
    for (const auto& st : vm.stores) {
        a_words += st.a_piece.size();
        b_words += st.b_piece.size();
    }
    bool one_copy_in = a_words == static_cast<std::size_t>(shape.n1() * shape.n2()) &&
                       b_words == static_cast<std::size_t>(shape.n2() * shape.n3());

    std::vector<std::vector<Value>> a_block(P), b_block(P);
    for (Dim i1 = 0; i1 < grid.p1; ++i1)
        for (Dim i2 = 0; i2 < grid.p2; ++i2) {
            std::vector<std::size_t> fiber;
            std::vector<std::vector<Value>> local;
            for (Dim i3 = 0; i3 < grid.p3; ++i3) {
                fiber.push_back(vm.rank(i1, i2, i3));
                local.push_back(vm.stores[fiber.back()].a_piece);
            }
            auto res = ring_all_gather(fiber, local, Phase::GatherA, log);
            for (std::size_t j = 0; j < fiber.size(); ++j) a_block[fiber[j]] = std::move(res.gathered[j]);
        }
    for (Dim i2 = 0; i2 < grid.p2; ++i2)
        for (Dim i3 = 0; i3 < grid.p3; ++i3) {
            std::vector<std::size_t> fiber;
            std::vector<std::vector<Value>> local;
            for (Dim i1 = 0; i1 < grid.p1; ++i1) {
                fiber.push_back(vm.rank(i1, i2, i3));
                local.push_back(vm.stores[fiber.back()].b_piece);
            }
            auto res = ring_all_gather(fiber, local, Phase::GatherB, log);
            for (std::size_t j = 0; j < fiber.size(); ++j) b_block[fiber[j]] = std::move(res.gathered[j]);
        }

    // local products, column-major br1 x br3
    std::vector<std::vector<Value>> product(P);
    std::vector<std::size_t> multiply_flops(P, 0);
    for (std::size_t r = 0; r < P; ++r) {
        const auto& A = a_block[r];  // br1 x br2, column-major
        const auto& B = b_block[r];  // br2 x br3, column-major
        auto& D = product[r];
        D.assign(static_cast<std::size_t>(br1 * br3), 0);
        for (Dim j = 0; j < br3; ++j)
            for (Dim l = 0; l < br2; ++l) {
                Value b = B[static_cast<std::size_t>(j * br2 + l)];
                for (Dim i = 0; i < br1; ++i) D[static_cast<std::size_t>(j * br1 + i)] += A[static_cast<std::size_t>(l * br1 + i)] * b;
            }
        multiply_flops[r] = static_cast<std::size_t>(br1 * br2 * br3);
    }
    if (opts.corrupt_rank && *opts.corrupt_rank < P && !product[*opts.corrupt_rank].empty())
        product[*opts.corrupt_rank][0] += 1;

    std::vector<std::size_t> reduction_flops(P, 0);
    for (Dim i1 = 0; i1 < grid.p1; ++i1)
        for (Dim i3 = 0; i3 < grid.p3; ++i3) {
            std::vector<std::size_t> fiber;
            std::vector<std::vector<Value>> addends;
            for (Dim i2 = 0; i2 < grid.p2; ++i2) {
                fiber.push_back(vm.rank(i1, i2, i3));
                addends.push_back(std::move(product[fiber.back()]));
            }
            auto res = ring_reduce_scatter(fiber, addends, Phase::ReduceScatterC, log);
            for (std::size_t j = 0; j < fiber.size(); ++j) {
                vm.stores[fiber[j]].c_piece = std::move(res.shards[j]);
                reduction_flops[fiber[j]] = res.additions[j];
            }
        }

    // reassemble C from the final pieces and check it
    Matrix c(shape.n1(), shape.n3());
    std::size_t c_words = 0;
    for (Dim i1 = 0; i1 < grid.p1; ++i1)
        for (Dim i3 = 0; i3 < grid.p3; ++i3) {
            std::vector<Value> flat;
            for (Dim i2 = 0; i2 < grid.p2; ++i2) {
                const auto& piece = vm.stores[vm.rank(i1, i2, i3)].c_piece;
                flat.insert(flat.end(), piece.begin(), piece.end());
            }
            c_words += flat.size();
            if (flat.size() != static_cast<std::size_t>(br1 * br3)) continue;
            for (Dim j = 0; j < br3; ++j)
                for (Dim i = 0; i < br1; ++i) c.at(i1 * br1 + i, i3 * br3 + j) = flat[static_cast<std::size_t>(j * br1 + i)];
        }

    SimReport rep{.shape = shape, .grid = grid, .seed = seed};
    rep.one_copy_in = one_copy_in;
    rep.one_copy_out = c_words == static_cast<std::size_t>(shape.n1() * shape.n3());
    rep.correct = rep.one_copy_out && c == multiply(vm.reference_a, vm.reference_b);
    rep.multiply_flops = std::move(multiply_flops);
    rep.reduction_flops = std::move(reduction_flops);
    rep.predicted = comm_cost(shape, grid);
    rep.message_count = log.size();

    const std::array<std::size_t, 3> fiber_size = {static_cast<std::size_t>(grid.p3), static_cast<std::size_t>(grid.p1),
                                                   static_cast<std::size_t>(grid.p2)};
    const std::array<std::size_t, 3> block_words = {static_cast<std::size_t>(br1 * br2), static_cast<std::size_t>(br2 * br3),
                                                    static_cast<std::size_t>(br1 * br3)};
    std::array<std::vector<std::size_t>, 3> messages;
    for (int ph = 0; ph < 3; ++ph) {
        auto& st = rep.phases[ph];
        st.phase = static_cast<Phase>(ph);
        st.fiber_size = fiber_size[ph];
        st.block_words = block_words[ph];
        st.even = block_words[ph] % fiber_size[ph] == 0;
        st.sent.assign(P, 0);
        st.received.assign(P, 0);
        messages[ph].assign(P, 0);
    }
    for (const auto& msg : log) {
        auto& st = rep.phases[static_cast<int>(msg.phase)];
        st.sent[msg.sender] += msg.words;
        st.received[msg.receiver] += msg.words;
        ++messages[static_cast<int>(msg.phase)][msg.sender];
    }
    for (int ph = 0; ph < 3; ++ph) {
        auto& st = rep.phases[ph];
        st.max_sent = *std::max_element(st.sent.begin(), st.sent.end());
        st.max_messages = *std::max_element(messages[ph].begin(), messages[ph].end());
        rep.critical_path_words += st.max_sent;
    }
    return rep;
}

// Throws when the simulated product differs from the sequential one.
inline const SimReport& require_correct(const SimReport& rep) {
    if (!rep.correct) throw std::runtime_error("mmcomm: simulated C differs from the sequential product");
    return rep;
}

struct PhaseComparison {
    Phase phase = Phase::GatherA;
    std::size_t measured = 0;
    Rational ideal;
    Rational deviation;           // |measured - ideal|
    std::size_t allowed = 0;      // fiber size - 1
    bool even = true;
    bool within_allowed = true;
};

struct PredictionComparison {
    std::array<PhaseComparison, 3> phases;
    bool all_even = true;
    // Every phase's measured maximum equals the formula exactly.
    bool exact = true;
    bool within_allowed = true;
};

// Measured per-phase maxima against the cost formula. With even splits the
// two agree exactly; otherwise each phase may deviate by up to one word per
// other fiber member.
inline PredictionComparison compare_to_prediction(const SimReport& rep) {
    PredictionComparison out;
    const std::array<Rational, 3> ideal = {rep.predicted.words_a, rep.predicted.words_b, rep.predicted.words_c};
    for (int ph = 0; ph < 3; ++ph) {
        const auto& st = rep.phases[ph];
        auto& pc = out.phases[ph];
        pc.phase = st.phase;
        pc.measured = st.max_sent;
        pc.ideal = ideal[ph];
        pc.deviation = abs(Rational{st.max_sent} - ideal[ph]);
        pc.allowed = st.fiber_size - 1;
        pc.even = st.even;
        pc.within_allowed = pc.deviation <= Rational{pc.allowed};
        out.all_even = out.all_even && pc.even;
        out.exact = out.exact && pc.deviation.is_zero();
        out.within_allowed = out.within_allowed && pc.within_allowed;
    }
    return out;
}

// beta * critical words + gamma * max flops + alpha * per-phase messages.
inline long double estimate_time(const SimReport& rep, const MachineModel& model) {
    std::size_t messages = 0;
    for (const auto& st : rep.phases) messages += st.max_messages;
    std::size_t flops = 0;
    for (std::size_t r = 0; r < rep.multiply_flops.size(); ++r) flops = std::max(flops, rep.flops(r));
    return model.time(static_cast<long double>(messages), static_cast<long double>(rep.critical_path_words),
                      static_cast<long double>(flops));
}

}  // namespace mmcomm
