#pragma once

// Subcommands of the `bellmax` tool. Exit codes: 0 success, 2 bad arguments
// or validation, 3 I/O failure, 4 invalid density matrix.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bellmax/anneal.hpp"
#include "bellmax/bench.hpp"
#include "bellmax/bellops.hpp"
#include "bellmax/io.hpp"
#include "bellmax/oracles.hpp"
#include "bellmax/qlinalg.hpp"

namespace bellmax::cli {

enum ExitCode : int { kOk = 0, kInternal = 1, kBadArguments = 2, kIoFailure = 3, kInvalidState = 4 };

struct ConstructArgs {
    std::string family;
    int n = 0;
    std::string out;
};

struct MaximizeArgs {
    std::string state;
    std::string family;
    int n = 0;
    AnnealSchedule schedule;
    int restarts = 8;
    std::uint64_t seed = 1;
    std::string out;
    std::string trace;
};

struct BenchArgs {
    int n_min = 2;
    int n_max = 6;
    int trials = 5;
    std::string out = "bench_report";
};

struct SampleArgs {
    int n = 2;
    std::uint64_t seed = 1;
    std::string out;
};

inline void emit(const std::string& path, const std::string& text, std::ostream& out) {
    if (path.empty() || path == "-") out << text;
    else io::write_text(path, text);
}

inline int cmd_construct(const ConstructArgs& a, std::ostream& out) {
    const Family f = Family::parse(a.family, a.n);
    emit(a.out, io::terms_to_json(canonicalize(f.terms()), f.name()).dump(2) + "\n", out);
    return kOk;
}

inline int cmd_maximize(const MaximizeArgs& a, std::ostream& out) {
    const DensityMatrix rho = io::read_state(a.state);
    const Family f = Family::parse(a.family, a.n > 0 ? a.n : rho.n_qubits());
    if (f.n != rho.n_qubits())
        throw ArgumentError("family " + f.name() + " needs " + std::to_string(f.n) + " qubits, state has " +
                            std::to_string(rho.n_qubits()));
    const OptimizationResult r = maximize(rho, f, a.restarts, a.schedule, a.seed);
    const auto result = io::result_to_json(rho, f, r, a.seed, a.restarts, a.schedule);
    emit(a.out, result.dump(2) + "\n", out);
    if (!a.trace.empty()) io::write_text(a.trace, io::trace_csv(r));
    return kOk;
}

inline int cmd_oracle(const std::string& state, std::ostream& out) {
    const DensityMatrix rho = io::read_state(state);
    if (rho.n_qubits() != 2) throw ArgumentError("oracle: state must have 2 qubits");
    out << std::fixed << std::setprecision(9) << horodecki_chsh(rho) << '\n';
    return kOk;
}

inline int cmd_bench(const BenchArgs& a, std::ostream& out) {
    const BenchReport report = scaling_report(a.n_min, a.n_max, a.trials, std::filesystem::path(a.out));
    out << report.to_csv();
    if (report.dense_slope)
        out << "dense slope " << *report.dense_slope << " bits/qubit, tensor slope " << *report.tensor_slope
            << " bits/qubit\n";
    return kOk;
}

inline int cmd_sample(const SampleArgs& a, std::ostream& out) {
    emit(a.out, io::state_to_json(random_density(a.n, a.seed)).dump(1) + "\n", out);
    return kOk;
}

/// `args` excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bell operator construction and maximum-violation search", "bellmax"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);

    ConstructArgs construct;
    auto* c = app.add_subcommand("construct", "Write the canonical term list of a Bell operator as JSON");
    c->add_option("--family", construct.family, "chsh | mermin | mabk | recursion")->required();
    c->add_option("--n", construct.n, "Number of parties (required for recursion)");
    c->add_option("--out", construct.out, "Output path (stdout when empty)");

    MaximizeArgs maxi;
    auto* m = app.add_subcommand("maximize", "Maximize Tr(rho B) over measurement settings");
    m->add_option("state", maxi.state, "State file (JSON)")->required();
    m->add_option("--family", maxi.family, "chsh | mermin | mabk | recursion")->required();
    m->add_option("--n", maxi.n, "Number of parties (defaults to the state's qubit count)");
    m->add_option("--t0", maxi.schedule.t0, "Initial temperature");
    m->add_option("--lambda", maxi.schedule.lambda, "Cooling rate per cycle");
    m->add_option("--restarts", maxi.restarts, "Independent annealing runs");
    m->add_option("--seed", maxi.seed, "Random seed");
    m->add_option("--cycles", maxi.schedule.max_cycles, "Maximum annealing cycles");
    m->add_option("--moves", maxi.schedule.moves_per_cycle, "Metropolis moves per cycle");
    m->add_option("--out", maxi.out, "Result path (stdout when empty)");
    m->add_option("--trace", maxi.trace, "Per-cycle trace CSV path");

    std::string oracle_state;
    auto* o = app.add_subcommand("oracle", "Print the analytic two-qubit CHSH maximum");
    o->add_option("state", oracle_state, "Two-qubit state file (JSON)")->required();

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "Measure evaluation cost growth with qubit count");
    b->add_option("--n-min", bench.n_min, "Smallest qubit count");
    b->add_option("--n-max", bench.n_max, "Largest qubit count");
    b->add_option("--trials", bench.trials, "Timed trials per size (median reported)");
    b->add_option("--out", bench.out, "Report base path; writes <out>.csv and <out>.json");

    SampleArgs sample;
    auto* s = app.add_subcommand("sample", "Write a random Hilbert-Schmidt state file");
    s->add_option("--n", sample.n, "Number of qubits");
    s->add_option("--seed", sample.seed, "Random seed");
    s->add_option("--out", sample.out, "Output path (stdout when empty)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kBadArguments;
    }

    try {
        if (*c) return cmd_construct(construct, out);
        if (*m) return cmd_maximize(maxi, out);
        if (*o) return cmd_oracle(oracle_state, out);
        if (*b) return cmd_bench(bench, out);
        if (*s) return cmd_sample(sample, out);
    } catch (const InvalidStateError& e) {
        err << "invalid density matrix:\n" << e.what() << '\n';
        return kInvalidState;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kBadArguments;
    } catch (const std::length_error& e) {
        err << "error: " << e.what() << '\n';
        return kBadArguments;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kBadArguments;
}

}  // namespace bellmax::cli
