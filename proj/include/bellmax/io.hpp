#pragma once

// File formats used by the command-line tool.
//
// State file:   {"n_qubits": N, "matrix": [[["re", "im"], ...], ...]}
//               row-major 2^N x 2^N; each entry a pair of decimal strings
//               with 17 significant digits (plain JSON numbers are accepted
//               on input).
// Term list:    {"family", "name", "n_parties", "normalization",
//               "classical_bound", "terms": [{"pattern": "AB..", "coefficient"}]}
// Result file:  family, n_qubits, best_value, best_settings, evaluations,
//               terminated, seed, restarts, schedule. Angles in radians.
// Trace CSV:    cycle,temperature,best_value

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "bellmax/anneal.hpp"
#include "bellmax/bellops.hpp"
#include "bellmax/qlinalg.hpp"

namespace bellmax::io {

using nlohmann::json;

inline constexpr double kStateFileTolerance = 1e-9;
inline constexpr double kResultRecheckTolerance = 1e-9;

inline std::string exact_decimal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot open " + p.string());
    std::ostringstream os;
    os << f.rdbuf();
    if (f.bad()) throw IoError("read failed for " + p.string());
    return os.str();
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw IoError("cannot open " + p.string() + " for writing");
    f << text;
    f.flush();
    if (!f) throw IoError("write failed for " + p.string());
}

// ---------------------------------------------------------------------------
// States

inline json state_to_json(const DensityMatrix& rho) {
    json rows = json::array();
    const auto& m = rho.matrix();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row.push_back(json::array({exact_decimal(m(i, j).real()), exact_decimal(m(i, j).imag())}));
        rows.push_back(std::move(row));
    }
    return {{"n_qubits", rho.n_qubits()}, {"matrix", std::move(rows)}};
}

namespace detail {

inline double number(const json& v) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        char* end = nullptr;
        const double d = std::strtod(s.c_str(), &end);
        if (end != s.c_str() && *end == '\0') return d;
    }
    throw InvalidStateError("state file: matrix entries must be numbers or decimal strings");
}

}  // namespace detail

/// Raw matrix and declared qubit count; structural problems throw InvalidStateError.
inline std::pair<ComplexMatrix, int> matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("n_qubits") || !j.contains("matrix"))
        throw InvalidStateError("state file: expected object with n_qubits and matrix");
    if (!j["n_qubits"].is_number_integer()) throw InvalidStateError("state file: n_qubits must be an integer");
    const int n = j["n_qubits"].get<int>();
    const json& rows = j["matrix"];
    if (!rows.is_array() || rows.empty()) throw InvalidStateError("state file: matrix must be a non-empty array");
    const auto d = static_cast<Eigen::Index>(rows.size());
    ComplexMatrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const json& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != d)
            throw InvalidStateError("state file: matrix must be square");
        for (Eigen::Index k = 0; k < d; ++k) {
            const json& e = row[static_cast<std::size_t>(k)];
            if (!e.is_array() || e.size() != 2) throw InvalidStateError("state file: entries must be [re, im] pairs");
            m(i, k) = Complex(detail::number(e[0]), detail::number(e[1]));
        }
    }
    return {std::move(m), n};
}

inline DensityMatrix state_from_json(const json& j, double tol = kStateFileTolerance) {
    auto [m, n] = matrix_from_json(j);
    if (n < 1 || n > max_qubits())
        throw ArgumentError("state file: n_qubits " + std::to_string(n) + " outside [1, " +
                            std::to_string(max_qubits()) + "]");
    return DensityMatrix::from_matrix(std::move(m), n, tol);
}

inline json parse_json(const std::string& text, const std::string& what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InvalidStateError(what + ": malformed JSON: " + e.what());
    }
}

inline DensityMatrix read_state(const std::filesystem::path& p) {
    return state_from_json(parse_json(read_text(p), p.string()));
}

inline void write_state(const DensityMatrix& rho, const std::filesystem::path& p) {
    write_text(p, state_to_json(rho).dump(1) + "\n");
}

// ---------------------------------------------------------------------------
// Term lists

inline json terms_to_json(const BellTermList& t, const std::string& family) {
    json terms = json::array();
    for (const auto& term : t.terms)
        terms.push_back({{"pattern", to_string(term.pattern)}, {"coefficient", term.coefficient}});
    json j = {{"family", family},
              {"name", t.name},
              {"n_parties", t.n_parties},
              {"normalization", to_string(t.normalization)},
              {"term_count", t.terms.size()},
              {"terms", std::move(terms)}};
    j["classical_bound"] = t.classical_bound ? json(*t.classical_bound) : json(nullptr);
    return j;
}

inline BellTermList terms_from_json(const json& j) {
    try {
        BellTermList t;
        t.n_parties = j.at("n_parties").get<int>();
        t.name = j.value("name", std::string{});
        t.normalization = j.value("normalization", std::string{"literal"}) == "literal"
                              ? Normalization::literal
                              : Normalization::recursion_normalized;
        if (j.contains("classical_bound") && !j["classical_bound"].is_null())
            t.classical_bound = j["classical_bound"].get<double>();
        for (const auto& term : j.at("terms")) {
            Pattern p = parse_pattern(term.at("pattern").get<std::string>());
            if (static_cast<int>(p.size()) != t.n_parties)
                throw ArgumentError("term list: pattern length differs from n_parties");
            t.terms.push_back({term.at("coefficient").get<double>(), std::move(p)});
        }
        return t;
    } catch (const json::exception& e) {
        throw ArgumentError(std::string("term list: ") + e.what());
    }
}

// ---------------------------------------------------------------------------
// Settings and results

inline json settings_to_json(const MeasurementSettings& s) {
    json parties = json::array();
    for (const auto& p : s.parties)
        parties.push_back({{"a", {{"theta", p.a.theta}, {"phi", p.a.phi}}},
                           {"b", {{"theta", p.b.theta}, {"phi", p.b.phi}}}});
    return parties;
}

inline MeasurementSettings settings_from_json(const json& j) {
    MeasurementSettings s;
    for (const auto& p : j)
        s.parties.push_back({{p.at("a").at("theta").get<double>(), p.at("a").at("phi").get<double>()},
                             {p.at("b").at("theta").get<double>(), p.at("b").at("phi").get<double>()}});
    return s;
}

inline json schedule_to_json(const AnnealSchedule& s) {
    return {{"t0", s.t0},
            {"lambda", s.lambda},
            {"moves_per_cycle", s.moves_per_cycle},
            {"max_cycles", s.max_cycles},
            {"stop_epsilon", s.stop_epsilon},
            {"stop_window", s.stop_window},
            {"freeze_ratio", s.freeze_ratio}};
}

/// Re-evaluates the reported settings densely and refuses to emit a result
/// that does not reproduce its own best value.
inline json result_to_json(const DensityMatrix& rho, const Family& family, const OptimizationResult& r,
                           std::uint64_t seed, int restarts, const AnnealSchedule& schedule) {
    const double recheck = value_dense(rho, family.terms(), r.best_settings);
    if (std::abs(recheck - r.best_value) > kResultRecheckTolerance)
        throw NumericalError("result: best_value " + exact_decimal(r.best_value) +
                             " does not reproduce (re-evaluated " + exact_decimal(recheck) + ")");
    return {{"family", family.name()},
            {"n_qubits", rho.n_qubits()},
            {"best_value", r.best_value},
            {"best_settings", settings_to_json(r.best_settings)},
            {"evaluations", r.evaluations},
            {"cycles_run", r.cycles_run},
            {"terminated", to_string(r.terminated)},
            {"seed", seed},
            {"restarts", restarts},
            {"schedule", schedule_to_json(schedule)}};
}

inline std::string trace_csv(const OptimizationResult& r) {
    std::ostringstream os;
    os << "cycle,temperature,best_value\n";
    for (std::size_t i = 0; i < r.trace.size(); ++i) {
        const double temp = i < r.temperatures.size() ? r.temperatures[i] : 0.0;
        os << i << ',' << exact_decimal(temp) << ',' << exact_decimal(r.trace[i]) << '\n';
    }
    return os.str();
}

}  // namespace bellmax::io
