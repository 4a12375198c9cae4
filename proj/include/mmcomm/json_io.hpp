#pragma once

// JSON and CSV encodings of the library's reports. Exact rationals become a
// decimal string plus a "num/den" fraction so that nothing is lost.

#include <string>
#include <vector>

#include <json.hpp>

#include "mmcomm/core_model.hpp"
#include "mmcomm/grid_planner.hpp"
#include "mmcomm/kkt_optimizer.hpp"
#include "mmcomm/mm_simulator.hpp"
#include "mmcomm/projection_oracle.hpp"
#include "mmcomm/quantity.hpp"
#include "mmcomm/rational.hpp"

namespace mmcomm {

using json = nlohmann::ordered_json;

inline json to_json(const Rational& r) {
    return json{{"value", r.to_decimal()}, {"fraction", r.to_fraction()}};
}

inline json to_json(const Quantity& q) {
    if (q.is_exact()) return to_json(*q.exact());
    return json{{"value", q.to_decimal()}, {"fraction", nullptr}};
}

// Inverse of to_json for exact values; approximate ones parse their decimal.
inline Rational rational_from_json(const json& j) {
    if (j.contains("fraction") && j["fraction"].is_string()) return Rational::parse(j["fraction"].get<std::string>());
    return Rational::parse(j.at("value").get<std::string>());
}

inline json shape_json(const ProblemShape& s) { return json::array({s.n1(), s.n2(), s.n3()}); }

inline json grid_json(const ProcessorGrid& g) { return json::array({g.p1, g.p2, g.p3}); }

inline json to_json(const BoundReport& r) {
    json j{{"shape", shape_json(r.shape)},
           {"procs", r.procs},
           {"regime", to_string(r.regime.tag)},
           {"on_boundary", r.regime.on_boundary},
           {"accessed", to_json(r.accessed)},
           {"owned", to_json(r.owned)},
           {"bound", to_json(r.lower_bound)},
           {"exceeds_work", r.exceeds_work}};
    if (r.memory) {
        j["memory"] = to_json(*r.memory);
        j["memory_dependent"] = to_json(*r.memory_dependent);
        j["binding"] = to_string(*r.binding);
    }
    return j;
}

inline json to_json(const CostBreakdown& c) {
    return json{{"words_a", to_json(c.words_a)},
                {"words_b", to_json(c.words_b)},
                {"words_c", to_json(c.words_c)},
                {"total", to_json(c.total)},
                {"owned", to_json(c.owned)}};
}

inline json to_json(const AnalyticGrid& g) {
    json factors = json::array();
    for (const auto& f : g.factors) factors.push_back(to_json(f));
    json j{{"regime", to_string(g.regime.tag)},
           {"on_boundary", g.regime.on_boundary},
           {"factors", factors},
           {"integral", g.integral()},
           {"grid", g.grid ? grid_json(*g.grid) : json(nullptr)},
           {"fractional_axes", json::array()}};
    for (int axis : g.fractional_axes) j["fractional_axes"].push_back(axis + 1);
    return j;
}

inline json to_json(const GridChoice& g) {
    return json{{"grid", grid_json(g.grid)}, {"cost", to_json(g.cost)}};
}

inline json to_json(const SimReport& r) {
    json phases = json::array();
    for (const auto& st : r.phases)
        phases.push_back(json{{"phase", to_string(st.phase)},
                              {"fiber_size", st.fiber_size},
                              {"block_words", st.block_words},
                              {"per_proc_sent", st.sent},
                              {"max_sent", st.max_sent},
                              {"even", st.even}});
    std::vector<std::size_t> flops;
    for (std::size_t i = 0; i < r.multiply_flops.size(); ++i) flops.push_back(r.flops(i));
    return json{{"shape", shape_json(r.shape)},
                {"grid", grid_json(r.grid)},
                {"seed", r.seed},
                {"per_phase", phases},
                {"critical_path_words", to_json(Rational{r.critical_path_words})},
                {"flops_per_proc", flops},
                {"correctness", r.correct},
                {"one_copy_in", r.one_copy_in},
                {"one_copy_out", r.one_copy_out},
                {"message_count", r.message_count},
                {"predicted_total", to_json(r.predicted.total)}};
}

inline json to_json(const KKTReport& r) {
    return json{{"primal_feasible", r.primal_feasible},
                {"dual_feasible", r.dual_feasible},
                {"stationary", r.stationary},
                {"complementary", r.complementary},
                {"primal_residual", static_cast<double>(r.primal_residual)},
                {"dual_residual", static_cast<double>(r.dual_residual)},
                {"stationarity_residual", static_cast<double>(r.stationarity_residual)},
                {"slackness_residual", static_cast<double>(r.slackness_residual)}};
}

namespace csv {

inline std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string row(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line += ',';
        line += escape(fields[i]);
    }
    return line + "\n";
}

// Splits one CSV line, honouring quoted fields.
inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else if (c != '\r') {
            out.back() += c;
        }
    }
    return out;
}

}  // namespace csv

}  // namespace mmcomm
