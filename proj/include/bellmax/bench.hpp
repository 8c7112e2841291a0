#pragma once

// Growth measurements for the Bell-value computation: canonical term counts,
// per-evaluation wall time of both evaluation paths, and annealing budgets.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "bellmax/anneal.hpp"
#include "bellmax/bellops.hpp"
#include "bellmax/qlinalg.hpp"

namespace bellmax {

inline std::size_t term_count(int n) { return build(n).terms.size(); }

struct TimingRecord {
    int n = 0;
    double dense_seconds = 0.0;   // median of value_dense
    double tensor_seconds = 0.0;  // median of value_tensor, tensor precomputed
};

namespace detail {

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Seconds per call; repeats until at least 1 ms has elapsed.
template <typename F>
double seconds_per_call(F&& f) {
    using clock = std::chrono::steady_clock;
    volatile double sink = 0.0;
    std::size_t reps = 0;
    const auto start = clock::now();
    auto now = start;
    do {
        sink = sink + f();
        ++reps;
        now = clock::now();
    } while (now - start < std::chrono::milliseconds(1));
    return std::chrono::duration<double>(now - start).count() / static_cast<double>(reps);
}

/// Benchmarks are single-threaded by contract; a second concurrent run throws.
class BenchGuard {
public:
    BenchGuard() {
        if (running().exchange(true)) throw std::runtime_error("bench: another benchmark is already running");
    }
    ~BenchGuard() { running().store(false); }
    BenchGuard(const BenchGuard&) = delete;
    BenchGuard& operator=(const BenchGuard&) = delete;

private:
    static std::atomic<bool>& running() {
        static std::atomic<bool> flag{false};
        return flag;
    }
};

inline TimingRecord time_eval_unguarded(int n, int trials, std::uint64_t seed) {
    if (n < 2 || n > max_qubits()) throw ResourceError("time_eval: n outside [2, max]");
    if (trials < 3) throw ArgumentError("time_eval: need at least 3 trials");
    Rng rng(seed);
    const BellTermList terms = build(n);
    std::vector<double> dense, tensor;
    for (int trial = 0; trial <= trials; ++trial) {
        const DensityMatrix rho = random_density(n, rng);
        const MeasurementSettings s = random_settings(n, rng);
        const CorrelationTensor tc = correlation_tensor(rho);
        const double td = seconds_per_call([&] { return value_dense(rho, terms, s); });
        const double tt = seconds_per_call([&] { return value_tensor(tc, terms, s); });
        if (trial == 0) continue;  // warmup
        dense.push_back(td);
        tensor.push_back(tt);
    }
    return {n, median(dense), median(tensor)};
}

}  // namespace detail

inline TimingRecord time_eval(int n, int trials, std::uint64_t seed = 1) {
    detail::BenchGuard guard;
    return detail::time_eval_unguarded(n, trials, seed);
}

struct StepBudget {
    std::uint64_t evaluations = 0;  // restarts x cycles x moves_per_cycle
    std::size_t term_count = 0;
    double dense_cost_model = 0.0;  // d^3 with d = 2^n
};

/// Predicted annealing cost-function calls, with max_cycles as the cycle count.
inline StepBudget step_budget(const AnnealSchedule& schedule, int n, int restarts) {
    schedule.validate();
    if (restarts < 1) throw ArgumentError("step_budget: restarts must be >= 1");
    StepBudget b;
    b.evaluations = static_cast<std::uint64_t>(restarts) * static_cast<std::uint64_t>(schedule.max_cycles) *
                    static_cast<std::uint64_t>(schedule.moves_per_cycle);
    b.term_count = term_count(n);
    b.dense_cost_model = std::pow(static_cast<double>(dim_for(n)), 3.0);
    return b;
}

/// Ordinary least-squares slope of y on x.
inline double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ArgumentError("least_squares_slope: need >= 2 points");
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= n;
    my /= n;
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

struct BenchRow {
    int n = 0;
    std::size_t term_count = 0;
    double dense_seconds = 0.0;
    double tensor_seconds = 0.0;
    std::uint64_t evaluations = 0;  // predicted per maximize call, default schedule, one restart
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::optional<double> dense_slope;   // log2(seconds) per added qubit
    std::optional<double> tensor_slope;
    std::string environment;

    std::string to_csv() const {
        std::ostringstream os;
        os.precision(9);
        os << "n,term_count,dense_s,tensor_s,evals\n";
        for (const auto& r : rows)
            os << r.n << ',' << r.term_count << ',' << r.dense_seconds << ',' << r.tensor_seconds << ','
               << r.evaluations << '\n';
        return os.str();
    }

    nlohmann::json to_json() const {
        nlohmann::json rows_json = nlohmann::json::array();
        for (const auto& r : rows)
            rows_json.push_back({{"n", r.n},
                                 {"term_count", r.term_count},
                                 {"dense_s", r.dense_seconds},
                                 {"tensor_s", r.tensor_seconds},
                                 {"evals", r.evaluations}});
        nlohmann::json slopes = nlohmann::json::object();
        slopes["dense"] = dense_slope ? nlohmann::json(*dense_slope) : nlohmann::json(nullptr);
        slopes["tensor"] = tensor_slope ? nlohmann::json(*tensor_slope) : nlohmann::json(nullptr);
        return {{"rows", rows_json}, {"fitted_slopes", slopes}, {"environment", environment}};
    }
};

inline std::string host_description() {
    std::ostringstream os;
    os << "threads=" << std::thread::hardware_concurrency();
#if defined(__VERSION__)
    os << "; compiler=" << __VERSION__;
#endif
#if defined(__linux__)
    os << "; os=linux";
#endif
    return os.str();
}

/// `base` with any .csv/.json extension replaced by each of the two.
inline std::pair<std::filesystem::path, std::filesystem::path> report_paths(std::filesystem::path base) {
    if (base.extension() == ".csv" || base.extension() == ".json") base.replace_extension();
    auto csv = base, json = base;
    csv += ".csv";
    json += ".json";
    return {csv, json};
}

inline void write_report(const BenchReport& report, const std::filesystem::path& base) {
    const auto [csv_path, json_path] = report_paths(base);
    auto write = [](const std::filesystem::path& p, const std::string& text) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw IoError("cannot open " + p.string() + " for writing");
        f << text;
        if (!f) throw IoError("write failed for " + p.string());
    };
    write(csv_path, report.to_csv());
    write(json_path, report.to_json().dump(2) + "\n");
}

/// Rows for n_min..n_max; slopes need at least three rows.
inline BenchReport scaling_report(int n_min, int n_max, int trials,
                                  const std::optional<std::filesystem::path>& out_base = std::nullopt,
                                  std::uint64_t seed = 1) {
    if (n_min < 2 || n_max < n_min || n_max > max_qubits())
        throw ArgumentError("scaling_report: need 2 <= n_min <= n_max <= " + std::to_string(max_qubits()));
    detail::BenchGuard guard;
    BenchReport report;
    report.environment = host_description();
    const AnnealSchedule defaults;
    std::vector<double> ns, dense_log, tensor_log;
    for (int n = n_min; n <= n_max; ++n) {
        const TimingRecord t = detail::time_eval_unguarded(n, trials, seed + static_cast<std::uint64_t>(n));
        report.rows.push_back({n, term_count(n), t.dense_seconds, t.tensor_seconds,
                               step_budget(defaults, n, 1).evaluations});
        ns.push_back(n);
        dense_log.push_back(std::log2(t.dense_seconds));
        tensor_log.push_back(std::log2(t.tensor_seconds));
    }
    if (ns.size() >= 3) {
        report.dense_slope = least_squares_slope(ns, dense_log);
        report.tensor_slope = least_squares_slope(ns, tensor_log);
    }
    if (out_base) write_report(report, *out_base);
    return report;
}

}  // namespace bellmax
