#pragma once

// Command-line front end: bound, grid, simulate, verify and sweep.
//
// Exit codes: 0 success, 2 configuration error, 3 simulated product wrong,
// 4 a verification check failed.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mmcomm/core_model.hpp"
#include "mmcomm/grid_planner.hpp"
#include "mmcomm/json_io.hpp"
#include "mmcomm/kkt_optimizer.hpp"
#include "mmcomm/mm_simulator.hpp"
#include "mmcomm/projection_oracle.hpp"

namespace mmcomm::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kSimulationFailure = 3, kVerificationFailure = 4 };

enum class Format { Human, Json, Csv };

struct ProcRange {
    Dim lo = 1;
    Dim hi = 1;

    bool single() const { return lo == hi; }
};

struct RunConfig {
    std::string command;
    std::optional<ProblemShape> shape;
    std::optional<ProcRange> procs;
    std::optional<Rational> memory;
    std::optional<ProcessorGrid> grid;
    std::uint64_t seed = 1;
    Format format = Format::Human;
    std::optional<std::string> out;
    bool tiny = false;
    std::optional<std::string> table;
    std::size_t budget = 100000;
    std::size_t samples = 1000;
    std::optional<std::size_t> inject_fault;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// "P" or "lo:hi".
inline ProcRange parse_procs(const std::string& text) {
    auto parse_one = [&](const std::string& s) -> Dim {
        std::size_t used = 0;
        long long v = 0;
        try {
            v = std::stoll(s, &used);
        } catch (const std::exception&) {
            throw ConfigError("invalid processor count '" + text + "'");
        }
        if (used != s.size()) throw ConfigError("invalid processor count '" + text + "'");
        if (v < 1) throw ConfigError("processor count must be >= 1, got " + s);
        return static_cast<Dim>(v);
    };
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        Dim p = parse_one(text);
        return {p, p};
    }
    ProcRange r{parse_one(text.substr(0, colon)), parse_one(text.substr(colon + 1))};
    if (r.lo > r.hi) throw ConfigError("empty processor range " + text);
    return r;
}

namespace detail {

struct Outcome {
    int code = kOk;
    std::string document;
    std::string message;  // for stderr
};

inline std::string grid_text(const std::optional<ProcessorGrid>& g) { return g ? g->to_string() : ""; }

inline std::string yes_no(bool b) { return b ? "yes" : "no"; }

inline std::string bool_text(bool b) { return b ? "true" : "false"; }

inline std::string fraction_or_empty(const Quantity& q) { return q.is_exact() ? q.exact()->to_fraction() : ""; }

inline std::string long_double_text(long double v) { return Quantity::approximate(v).to_decimal(); }

inline const ProblemShape& need_shape(const RunConfig& c) {
    if (!c.shape) throw ConfigError(c.command + " requires --shape N1 N2 N3");
    return *c.shape;
}

inline Dim need_single_procs(const RunConfig& c) {
    if (!c.procs) throw ConfigError(c.command + " requires --procs P");
    if (!c.procs->single()) throw ConfigError(c.command + " takes a single processor count, not a range");
    return c.procs->lo;
}

// Best grid that divides the shape; the best of all triples when none does.
inline std::pair<GridChoice, bool> best_grid(const ProblemShape& s, Dim procs) {
    try {
        return {exhaustive_grid(s, procs, true), true};
    } catch (const std::invalid_argument&) {
        return {exhaustive_grid(s, procs, false), false};
    }
}

inline std::string shape_text(const ProblemShape& s) {
    return std::to_string(s.n1()) + " x " + std::to_string(s.n2()) + " x " + std::to_string(s.n3());
}

class Table {
public:
    void add(std::string key, std::string value) { rows_.emplace_back(std::move(key), std::move(value)); }

    std::string str() const {
        std::size_t width = 0;
        for (const auto& r : rows_) width = std::max(width, r.first.size());
        std::ostringstream os;
        for (const auto& [k, v] : rows_) os << std::left << std::setw(static_cast<int>(width) + 2) << k << v << "\n";
        return os.str();
    }

private:
    std::vector<std::pair<std::string, std::string>> rows_;
};

inline Outcome cmd_bound(const RunConfig& c) {
    const auto& s = need_shape(c);
    const Dim P = need_single_procs(c);
    BoundReport r = lower_bound(s, P, c.memory);
    Outcome o;
    switch (c.format) {
        case Format::Json:
            o.document = to_json(r).dump(2) + "\n";
            break;
        case Format::Csv: {
            std::vector<std::string> head = {"n1", "n2", "n3", "P", "regime", "on_boundary", "accessed",
                                             "accessed_fraction", "owned", "owned_fraction", "bound", "bound_fraction"};
            std::vector<std::string> row = {std::to_string(s.n1()),        std::to_string(s.n2()),
                                            std::to_string(s.n3()),        std::to_string(P),
                                            to_string(r.regime.tag),       bool_text(r.regime.on_boundary),
                                            r.accessed.to_decimal(),       fraction_or_empty(r.accessed),
                                            r.owned.to_decimal(),          r.owned.to_fraction(),
                                            r.lower_bound.to_decimal(),    fraction_or_empty(r.lower_bound)};
            if (r.memory) {
                head.insert(head.end(), {"memory", "memory_dependent", "binding"});
                row.insert(row.end(), {r.memory->to_decimal(), r.memory_dependent->to_decimal(), to_string(*r.binding)});
            }
            o.document = csv::row(head) + csv::row(row);
            break;
        }
        case Format::Human: {
            Table t;
            t.add("shape", shape_text(s) + "  (m=" + std::to_string(s.m()) + ", n=" + std::to_string(s.n()) +
                               ", k=" + std::to_string(s.k()) + ")");
            t.add("processors", std::to_string(P));
            t.add("regime", to_string(r.regime.tag) + (r.regime.on_boundary ? " (on regime boundary)" : ""));
            t.add("accessed data D", r.accessed.to_decimal());
            t.add("owned data", r.owned.to_decimal());
            t.add("lower bound", r.lower_bound.to_decimal());
            if (r.memory) {
                t.add("memory M", r.memory->to_decimal());
                t.add("2mnk/(P sqrt(M))", r.memory_dependent->to_decimal());
                t.add("binding", to_string(*r.binding));
            }
            if (r.exceeds_work) t.add("note", "P exceeds the number of scalar multiplications");
            o.document = t.str();
            break;
        }
    }
    return o;
}

inline Outcome cmd_grid(const RunConfig& c) {
    const auto& s = need_shape(c);
    const Dim P = need_single_procs(c);
    AnalyticGrid a = analytic_grid(s, P);
    auto [best, divides] = best_grid(s, P);
    std::optional<CostBreakdown> analytic_cost;
    if (a.grid) analytic_cost = comm_cost(s, *a.grid);
    const bool agree = analytic_cost && analytic_cost->total == best.cost.total;
    std::optional<CostBreakdown> given_cost;
    if (c.grid) {
        if (c.grid->procs() != P) throw ConfigError("--grid " + c.grid->to_string() + " does not multiply to P=" + std::to_string(P));
        given_cost = comm_cost(s, *c.grid);
    }

    Outcome o;
    switch (c.format) {
        case Format::Json: {
            json j{{"shape", shape_json(s)},
                   {"procs", P},
                   {"analytic", to_json(a)},
                   {"analytic_cost", analytic_cost ? to_json(*analytic_cost) : json(nullptr)},
                   {"exhaustive", to_json(best)},
                   {"exhaustive_divides", divides},
                   {"agree", agree}};
            if (c.grid) j["given"] = json{{"grid", grid_json(*c.grid)}, {"cost", to_json(*given_cost)}};
            o.document = j.dump(2) + "\n";
            break;
        }
        case Format::Csv: {
            std::string factors;
            for (int i = 0; i < 3; ++i) factors += (i ? ";" : "") + a.factors[i].to_decimal();
            o.document = csv::row({"n1", "n2", "n3", "P", "regime", "analytic_factors", "analytic_grid", "analytic_cost",
                                   "exhaustive_grid", "exhaustive_cost", "exhaustive_divides", "agree"}) +
                         csv::row({std::to_string(s.n1()), std::to_string(s.n2()), std::to_string(s.n3()),
                                   std::to_string(P), to_string(a.regime.tag), factors, grid_text(a.grid),
                                   analytic_cost ? analytic_cost->total.to_decimal() : "", best.grid.to_string(),
                                   best.cost.total.to_decimal(), bool_text(divides), bool_text(agree)});
            break;
        }
        case Format::Human: {
            Table t;
            t.add("shape", shape_text(s));
            t.add("processors", std::to_string(P));
            t.add("regime", to_string(a.regime.tag));
            if (a.grid) {
                t.add("analytic grid", a.grid->to_string() + "  (cost " + analytic_cost->total.to_decimal() + ")");
            } else {
                std::string f;
                for (int i = 0; i < 3; ++i) f += (i ? ", " : "") + std::string("p") + std::to_string(i + 1) + "=" + a.factors[i].to_decimal();
                std::string axes;
                for (int axis : a.fractional_axes) axes += (axes.empty() ? "" : ", ") + std::string("p") + std::to_string(axis + 1);
                t.add("analytic grid", "non-integral: " + f);
                t.add("non-integral factors", axes);
            }
            t.add("exhaustive grid", best.grid.to_string() + "  (cost " + best.cost.total.to_decimal() + ")" +
                                         (divides ? "" : "  [no factor triple divides the shape]"));
            t.add("agree", yes_no(agree));
            if (c.grid) t.add("given grid", c.grid->to_string() + "  (cost " + given_cost->total.to_decimal() + ")");
            o.document = t.str();
            break;
        }
    }
    return o;
}

inline Outcome cmd_simulate(const RunConfig& c) {
    const auto& s = need_shape(c);
    ProcessorGrid g;
    Dim P = 0;
    if (c.grid) {
        g = *c.grid;
        P = g.procs();
        if (c.procs && (!c.procs->single() || c.procs->lo != P))
            throw ConfigError("--grid " + g.to_string() + " does not multiply to --procs");
        if (!g.divides(s)) throw ConfigError("grid " + g.to_string() + " does not divide shape " + shape_text(s));
    } else {
        P = need_single_procs(c);
        try {
            g = exhaustive_grid(s, P, true).grid;
        } catch (const std::invalid_argument&) {
            throw ConfigError("no factor triple of P=" + std::to_string(P) + " divides shape " + shape_text(s) +
                              "; pass --grid");
        }
    }
    SimOptions opts;
    opts.corrupt_rank = c.inject_fault;
    if (opts.corrupt_rank && *opts.corrupt_rank >= static_cast<std::size_t>(P))
        throw ConfigError("--inject-fault rank out of range");

    SimReport rep = run_algorithm(s, g, c.seed, opts);
    BoundReport b = lower_bound(s, P);
    PredictionComparison cmp = compare_to_prediction(rep);
    const Quantity measured{Rational{rep.critical_path_words}};
    const bool attains = compare(measured, b.lower_bound) == 0 && b.lower_bound.is_exact();

    Outcome o;
    switch (c.format) {
        case Format::Json: {
            json j = to_json(rep);
            j["bound"] = to_json(b.lower_bound);
            j["prediction_exact"] = cmp.exact;
            j["attains_bound"] = attains;
            o.document = j.dump(2) + "\n";
            break;
        }
        case Format::Csv:
            o.document =
                csv::row({"n1", "n2", "n3", "p1", "p2", "p3", "seed", "gather_a", "gather_b", "reduce_scatter_c",
                          "critical_path_words", "predicted_total", "bound", "attains_bound", "correct"}) +
                csv::row({std::to_string(s.n1()), std::to_string(s.n2()), std::to_string(s.n3()), std::to_string(g.p1),
                          std::to_string(g.p2), std::to_string(g.p3), std::to_string(c.seed),
                          std::to_string(rep.phases[0].max_sent), std::to_string(rep.phases[1].max_sent),
                          std::to_string(rep.phases[2].max_sent), std::to_string(rep.critical_path_words),
                          rep.predicted.total.to_decimal(), b.lower_bound.to_decimal(), bool_text(attains),
                          bool_text(rep.correct)});
            break;
        case Format::Human: {
            Table t;
            t.add("shape", shape_text(s));
            t.add("grid", g.to_string());
            t.add("seed", std::to_string(c.seed));
            for (const auto& pc : cmp.phases)
                t.add("  " + to_string(pc.phase),
                      std::to_string(pc.measured) + " words (predicted " + pc.ideal.to_decimal() + ")");
            t.add("critical path", std::to_string(rep.critical_path_words) + " words");
            t.add("predicted", rep.predicted.total.to_decimal());
            t.add("lower bound", b.lower_bound.to_decimal());
            t.add("attains bound", yes_no(attains));
            t.add("correct", yes_no(rep.correct));
            o.document = t.str();
            break;
        }
    }
    if (!rep.correct) {
        o.code = kSimulationFailure;
        o.message = "simulation failed: computed C differs from the sequential product";
    }
    return o;
}

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

inline Outcome cmd_verify(const RunConfig& c) {
    const auto& s = need_shape(c);
    const Dim P = need_single_procs(c);
    std::vector<Check> checks;
    json extra = json::object();

    if (c.tiny) {
        if (s.volume() > static_cast<int128>(kExhaustiveLatticeLimit))
            throw ConfigError("--tiny needs n1 n2 n3 <= " + std::to_string(kExhaustiveLatticeLimit));
        ExhaustiveTable t = exhaustive_projection_table(s);
        const std::size_t min_sum = t.min_sum(P);
        const Quantity D = accessed_data(s, P);
        const bool ok = compare(Quantity{Rational{min_sum}}, D) >= 0;
        checks.push_back({"min projection sum >= D", ok,
                          "min projection sum " + std::to_string(min_sum) + (ok ? " >= " : " < ") + "D = " + D.to_decimal()});
        checks.push_back({"Loomis-Whitney", t.lw_violations() == 0,
                          std::to_string(t.total_subsets) + " subsets, " + std::to_string(t.lw_violations()) + " violations"});
        checks.push_back({"projection floors", t.projection_floors_hold(P),
                          "every subset with |F| >= " + std::to_string(t.threshold(P)) + " touches >= 1/P of each matrix"});
        extra["min_projection_sum"] = min_sum;
        extra["accessed"] = to_json(D);
    }

    OptProblem p = OptProblem::from_shape(s, P);
    OptSolution sol = analytic_solution(p);
    if (c.inject_fault) sol.x[0] *= 0.5L;  // test hook: break primal feasibility
    KKTReport k = kkt_verify(p, sol);
    checks.push_back({"primal feasibility", k.primal_feasible, "residual " + long_double_text(k.primal_residual)});
    checks.push_back({"dual feasibility", k.dual_feasible, "residual " + long_double_text(k.dual_residual)});
    checks.push_back({"stationarity", k.stationary, "residual " + long_double_text(k.stationarity_residual)});
    checks.push_back({"complementary slackness", k.complementary, "residual " + long_double_text(k.slackness_residual)});

    OracleResult oracle = numeric_minimize_oracle(p, c.budget);
    const long double opt = sol.objective();
    const bool oracle_ok = oracle.objective >= opt * (1 - kStationarityRelTol);
    checks.push_back({"numeric oracle", oracle_ok,
                      "best sampled " + long_double_text(oracle.objective) + " over " +
                          std::to_string(oracle.evaluations) + " points"});

    QuasiconvexityReport q = quasiconvexity_check(c.samples, c.seed);
    std::string qdetail = std::to_string(q.pairs) + " pairs, " + std::to_string(q.violations) + " violations";
    checks.push_back({"quasiconvexity", q.passed(), qdetail});

    const Quantity analytic = analytic_objective(p);
    std::string point = "(" + long_double_text(sol.x[0]) + ", " + long_double_text(sol.x[1]) + ", " +
                        long_double_text(sol.x[2]) + ")";

    Outcome o;
    std::vector<std::string> failed;
    for (const auto& ch : checks)
        if (!ch.passed) failed.push_back(ch.name);

    switch (c.format) {
        case Format::Json: {
            json arr = json::array();
            for (const auto& ch : checks) arr.push_back(json{{"check", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
            json j{{"shape", shape_json(s)},
                   {"procs", P},
                   {"case", sol.case_tag},
                   {"optimum", to_json(analytic)},
                   {"x", json::array({static_cast<double>(sol.x[0]), static_cast<double>(sol.x[1]),
                                      static_cast<double>(sol.x[2])})},
                   {"mu", json::array({static_cast<double>(sol.mu[0]), static_cast<double>(sol.mu[1]),
                                       static_cast<double>(sol.mu[2]), static_cast<double>(sol.mu[3])})},
                   {"kkt", to_json(k)},
                   {"checks", arr},
                   {"passed", failed.empty()}};
            j.update(extra);
            o.document = j.dump(2) + "\n";
            break;
        }
        case Format::Csv: {
            o.document = csv::row({"check", "passed", "detail"});
            for (const auto& ch : checks) o.document += csv::row({ch.name, bool_text(ch.passed), ch.detail});
            break;
        }
        case Format::Human: {
            std::ostringstream os;
            os << "case " << sol.case_tag << " optimum " << analytic.to_decimal() << " at x = " << point << "\n";
            for (const auto& ch : checks) os << (ch.passed ? "PASS  " : "FAIL  ") << ch.name << ": " << ch.detail << "\n";
            o.document = os.str();
            break;
        }
    }
    if (!failed.empty()) {
        o.code = kVerificationFailure;
        std::string names;
        for (const auto& f : failed) names += (names.empty() ? "" : ", ") + f;
        o.message = "verification failed: " + names;
    }
    return o;
}

inline Outcome constants_table(const RunConfig& c) {
    const std::array<RegimeKind, 3> order = {RegimeKind::ThreeD, RegimeKind::TwoD, RegimeKind::OneD};
    Outcome o;
    switch (c.format) {
        case Format::Json: {
            json rows = json::array();
            for (auto kind : order) {
                ConstantsRow r = prior_constants(kind);
                json consts = json::object();
                for (const auto& pc : r.constants)
                    consts[pc.source] = pc.value ? json{{"value", long_double_text(*pc.value)}, {"expression", pc.expression}}
                                                 : json(nullptr);
                rows.push_back(json{{"regime", to_string(kind)}, {"leading_term", r.leading_term}, {"constants", consts}});
            }
            o.document = json{{"table", "constants"}, {"rows", rows}}.dump(2) + "\n";
            break;
        }
        case Format::Csv: {
            ConstantsRow first = prior_constants(order[0]);
            std::vector<std::string> head = {"regime", "leading_term"};
            for (const auto& pc : first.constants) head.push_back(pc.source);
            o.document = csv::row(head);
            for (auto kind : order) {
                ConstantsRow r = prior_constants(kind);
                std::vector<std::string> row = {to_string(kind), r.leading_term};
                for (const auto& pc : r.constants) row.push_back(pc.value ? long_double_text(*pc.value) : "");
                o.document += csv::row(row);
            }
            break;
        }
        case Format::Human: {
            std::ostringstream os;
            os << std::left << std::setw(8) << "regime" << std::setw(18) << "leading term";
            for (const auto& pc : prior_constants(order[0]).constants) os << std::setw(22) << pc.source;
            os << "\n";
            for (auto kind : order) {
                ConstantsRow r = prior_constants(kind);
                os << std::setw(8) << to_string(kind) << std::setw(18) << r.leading_term;
                for (const auto& pc : r.constants) {
                    std::ostringstream v;
                    if (pc.value)
                        v << std::fixed << std::setprecision(4) << static_cast<double>(*pc.value) << " " << pc.expression;
                    else
                        v << "-";
                    os << std::setw(22) << v.str();
                }
                os << "\n";
            }
            o.document = os.str();
            break;
        }
    }
    return o;
}

struct SweepRow {
    Dim procs = 1;
    Regime regime;
    Quantity accessed{0};
    Quantity bound{0};
    AnalyticGrid analytic;
    GridChoice best;
    bool divides = true;
    bool attained = false;
};

inline SweepRow sweep_row(const ProblemShape& s, Dim P) {
    BoundReport b = lower_bound(s, P);
    auto [best, divides] = best_grid(s, P);
    SweepRow r{P, b.regime, b.accessed, b.lower_bound, analytic_grid(s, P), best, divides, false};
    r.attained = r.bound.is_exact() && compare(Quantity{best.cost.total}, r.bound) == 0;
    return r;
}

inline Outcome cmd_sweep(const RunConfig& c) {
    if (c.table) return constants_table(c);
    const auto& s = need_shape(c);
    if (!c.procs) throw ConfigError("sweep requires --procs P or --procs LO:HI");
    const ProcRange range = *c.procs;
    if (range.hi - range.lo >= 1000000) throw ConfigError("processor range too large (at most 10^6 rows)");

    // rows fan out over worker threads and are collected in P order
    const std::size_t count = static_cast<std::size_t>(range.hi - range.lo + 1);
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), count));
    std::vector<std::future<std::vector<SweepRow>>> parts;
    for (std::size_t w = 0; w < workers; ++w) {
        Dim lo = range.lo + static_cast<Dim>(count * w / workers);
        Dim hi = range.lo + static_cast<Dim>(count * (w + 1) / workers);
        parts.push_back(std::async(workers > 1 ? std::launch::async : std::launch::deferred, [&s, lo, hi] {
            std::vector<SweepRow> rows;
            for (Dim P = lo; P < hi; ++P) rows.push_back(sweep_row(s, P));
            return rows;
        }));
    }
    std::vector<SweepRow> rows;
    for (auto& f : parts) {
        auto part = f.get();
        rows.insert(rows.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }

    const Rational m_over_n{s.m(), s.n()};
    const Rational mn_over_k2{int128{s.m()} * s.n(), int128{s.k()} * s.k()};
    Outcome o;
    switch (c.format) {
        case Format::Json: {
            json arr = json::array();
            for (const auto& r : rows)
                arr.push_back(json{{"P", r.procs},
                                   {"regime", to_string(r.regime.tag)},
                                   {"on_boundary", r.regime.on_boundary},
                                   {"accessed", to_json(r.accessed)},
                                   {"bound", to_json(r.bound)},
                                   {"analytic_grid", r.analytic.grid ? grid_json(*r.analytic.grid) : json(nullptr)},
                                   {"exhaustive_grid", grid_json(r.best.grid)},
                                   {"exhaustive_divides", r.divides},
                                   {"cost", to_json(r.best.cost.total)},
                                   {"attained", r.attained}});
            o.document = json{{"shape", shape_json(s)},
                              {"boundaries", json{{"m_over_n", to_json(m_over_n)}, {"mn_over_k2", to_json(mn_over_k2)}}},
                              {"rows", arr}}
                             .dump(2) +
                         "\n";
            break;
        }
        case Format::Csv:
        case Format::Human: {
            std::string doc = csv::row({"P", "regime", "on_boundary", "accessed", "bound", "bound_fraction", "analytic_grid",
                                        "exhaustive_grid", "exhaustive_divides", "cost", "cost_fraction", "attained",
                                        "m_over_n", "mn_over_k2"});
            for (const auto& r : rows)
                doc += csv::row({std::to_string(r.procs), to_string(r.regime.tag), bool_text(r.regime.on_boundary),
                                 r.accessed.to_decimal(), r.bound.to_decimal(), fraction_or_empty(r.bound),
                                 grid_text(r.analytic.grid), r.best.grid.to_string(), bool_text(r.divides),
                                 r.best.cost.total.to_decimal(), r.best.cost.total.to_fraction(), bool_text(r.attained),
                                 m_over_n.to_decimal(), mn_over_k2.to_decimal()});
            o.document = doc;
            break;
        }
    }
    return o;
}

inline Outcome dispatch(const RunConfig& c) {
    if (c.command == "bound") return cmd_bound(c);
    if (c.command == "grid") return cmd_grid(c);
    if (c.command == "simulate") return cmd_simulate(c);
    if (c.command == "verify") return cmd_verify(c);
    if (c.command == "sweep") return cmd_sweep(c);
    throw ConfigError("unknown command '" + c.command + "'");
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Communication lower bounds and grid planning for parallel matrix multiplication", "mmcomm"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");

    std::vector<Dim> shape, grid;
    std::string procs, memory, format = "human", table;
    std::uint64_t seed = 1;
    std::string out_path;
    bool tiny = false;
    std::size_t budget = 100000, samples = 1000;
    long long inject = -1;

    app.add_option("--shape", shape, "Dimensions N1 N2 N3 (A is N1xN2, B is N2xN3)")->expected(3);
    app.add_option("--procs", procs, "Processor count P, or a range LO:HI for sweep");
    app.add_option("--memory", memory, "Local memory size M in words");
    app.add_option("--grid", grid, "Processor grid P1 P2 P3 aligned to N1 N2 N3")->expected(3);
    app.add_option("--seed", seed, "Seed for generated matrices and samples");
    app.add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "json", "csv"}));
    app.add_option("--out", out_path, "Write the output document to this file");
    app.add_flag("--tiny", tiny, "verify: add exhaustive lattice checks (N1 N2 N3 <= 24)");
    app.add_option("--table", table, "sweep: print a reference table instead")->check(CLI::IsMember({"constants"}));
    app.add_option("--budget", budget, "verify: evaluations for the numeric oracle")->check(CLI::Range(1000, 100000000));
    app.add_option("--samples", samples, "verify: point pairs for the quasiconvexity check");
    app.add_option("--inject-fault", inject, "Test hook: corrupt a result so the checks must fail")->group("");

    app.add_subcommand("bound", "Lower bound on words communicated by some processor")->fallthrough();
    app.add_subcommand("grid", "Analytic and exhaustive processor grids")->fallthrough();
    app.add_subcommand("simulate", "Run the grid algorithm on a virtual machine")->fallthrough();
    app.add_subcommand("verify", "Check the optimisation certificate and oracles")->fallthrough();
    app.add_subcommand("sweep", "Bound and grid table over a processor range")->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    RunConfig cfg;
    try {
        cfg.command = app.get_subcommands().front()->get_name();
        if (!shape.empty()) cfg.shape = ProblemShape{shape[0], shape[1], shape[2]};
        if (!procs.empty()) cfg.procs = parse_procs(procs);
        if (!memory.empty()) cfg.memory = Rational::parse(memory);
        if (!grid.empty()) {
            for (Dim g : grid)
                if (g < 1) throw ConfigError("grid factors must be >= 1");
            cfg.grid = ProcessorGrid{grid[0], grid[1], grid[2]};
        }
        cfg.seed = seed;
        cfg.format = format == "json" ? Format::Json : (format == "csv" ? Format::Csv : Format::Human);
        if (!out_path.empty()) cfg.out = out_path;
        cfg.tiny = tiny;
        if (!table.empty()) cfg.table = table;
        cfg.budget = budget;
        cfg.samples = samples;
        if (inject >= 0) cfg.inject_fault = static_cast<std::size_t>(inject);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    detail::Outcome outcome;
    try {
        outcome = detail::dispatch(cfg);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::overflow_error& e) {
        err << "error: " << e.what() << "\n";
        return kConfigError;
    }

    if (cfg.out) {
        std::ofstream file(*cfg.out);
        if (!file) {
            err << "error: cannot write " << *cfg.out << "\n";
            return kConfigError;
        }
        file << outcome.document;
    } else {
        out << outcome.document;
    }
    if (!outcome.message.empty()) err << outcome.message << "\n";
    return outcome.code;
}

}  // namespace mmcomm::cli
