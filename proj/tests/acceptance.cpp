// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bellmax/bellmax.hpp"

using namespace bellmax;

namespace {

using clock_type = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(clock_type::time_point start) {
    return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const double tsirelson = 2.0 * std::numbers::sqrt2;

Outcome tsirelson_saturation() {
    const auto start = clock_type::now();
    const double v = maximize(ghz(2), Family::chsh(), 8, AnnealSchedule{}, 1).best_value;
    const double t = seconds_since(start);
    return {std::abs(v - tsirelson) <= 1e-3 && t < 10.0, fmt("value=%.9f target=%.9f time=%.2fs", v, tsirelson, t)};
}

Outcome fig1a_value() {
    const DensityMatrix rho = fig1a_state();
    const double v = maximize(rho, Family::chsh(), 8, AnnealSchedule{}, 1).best_value;
    const double h = horodecki_chsh(rho);
    return {std::abs(v - 2.0 / 3.0) <= 1e-3 && std::abs(v - h) <= 1e-3, fmt("value=%.9f oracle=%.9f", v, h)};
}

Outcome oracle_agreement() {
    const auto start = clock_type::now();
    Rng rng(20240101);
    int reached = 0;
    double worst_excess = -1e300;
    for (int i = 0; i < 100; ++i) {
        const DensityMatrix rho = random_density(2, rng);
        const double h = horodecki_chsh(rho);
        const double v = maximize(rho, Family::chsh(), 8, AnnealSchedule{}, 1000 + static_cast<std::uint64_t>(i))
                             .best_value;
        reached += std::abs(v - h) <= 1e-2;
        worst_excess = std::max(worst_excess, v - h);
    }
    const double t = seconds_since(start);
    return {reached >= 95 && worst_excess <= 1e-6 && t < 300.0,
            fmt("reached=%d/100 max_excess=%.3e time=%.1fs", reached, worst_excess, t)};
}

Outcome mermin_ghz() {
    double fixture = std::nan("");
    for (const Fixture& f : fixtures())
        if (f.name == "mermin-xy") fixture = value_dense(fixture_state(f.state), f.family.terms(), f.settings);
    const double v = maximize(ghz(3), Family::mermin(), 8, AnnealSchedule{}, 1).best_value;
    return {std::abs(fixture - 4.0) <= 1e-10 && std::abs(v - 4.0) <= 1e-3,
            fmt("fixture=%.12f maximize=%.9f", fixture, v)};
}

Outcome normalized_maxima() {
    const auto start = clock_type::now();
    bool ok = true;
    std::ostringstream os;
    for (int n = 2; n <= 5; ++n) {
        const double v = maximize(ghz(n), Family::recursion(n), 8, AnnealSchedule{}, 1).best_value;
        const double target = ghz_normalized_max(n);
        ok = ok && std::abs(v - target) <= 1e-2;
        os << fmt("N=%d %.6f/%.6f ", n, v, target);
    }
    const double t = seconds_since(start);
    os << fmt("time=%.1fs", t);
    return {ok && t < 600.0, os.str()};
}

Outcome term_count_law() {
    const std::size_t expected[] = {4, 4, 16, 64, 256};
    bool ok = true;
    std::ostringstream got, want;
    for (int n = 2; n <= 6; ++n) {
        const std::size_t c = term_count(n);
        const std::size_t e = expected[n - 2];
        ok = ok && c == e;
        got << (n > 2 ? "," : "") << c;
        want << (n > 2 ? "," : "") << e;
    }
    return {ok, "counts N=2..6 (" + got.str() + ") expected (" + want.str() + ")"};
}

Outcome recursion_mabk_consistency() {
    auto positive = [] {
        std::vector<Equivalence> pos;
        for (const auto& e : equivalences(build(4), mabk4(), 1e-12))
            if (e.scale > 0.0) pos.push_back(e);
        return pos;
    };
    const auto all = equivalences(build(4), mabk4(), 1e-12);
    const auto first = positive(), second = positive();
    std::ostringstream os;
    os << "relabelings found=" << all.size();
    for (const auto& e : all) {
        os << " [flips=";
        for (bool f : e.flipped) os << (f ? '1' : '0');
        os << fmt(" scale=%g]", e.scale);
    }
    const bool stable = first.size() == second.size() &&
                        (first.empty() || first.front().scale == second.front().scale);
    os << " positive=" << first.size();
    return {!first.empty() && stable, os.str()};
}

Outcome dual_path() {
    Rng rng(99);
    double worst = 0.0;
    for (int n = 2; n <= 5; ++n) {
        const BellTermList t = build(n);
        for (int i = 0; i < 100; ++i) {
            const DensityMatrix rho = random_density(n, rng);
            const MeasurementSettings s = random_settings(n, rng);
            worst = std::max(worst, std::abs(value_dense(rho, t, s) - value_tensor(correlation_tensor(rho), t, s)));
        }
    }
    return {worst <= 1e-10, fmt("max |dense - tensor| = %.3e", worst)};
}

Outcome bound_properties() {
    Rng rng(7);
    double chsh_worst = 0.0;
    bool ok = true;
    for (int i = 0; i < 1000; ++i) {
        const double v = value_tensor(correlation_tensor(random_density(2, rng)), chsh(), random_settings(2, rng));
        chsh_worst = std::max(chsh_worst, std::abs(v));
    }
    ok = chsh_worst <= tsirelson + 1e-9;
    std::ostringstream os;
    os << fmt("chsh max|v|=%.6f", chsh_worst);
    for (int n = 2; n <= 5; ++n) {
        const BellTermList t = build(n);
        double worst = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double v = value_tensor(correlation_tensor(random_density(n, rng)), t, random_settings(n, rng));
            worst = std::max(worst, std::abs(v));
        }
        ok = ok && worst <= ghz_normalized_max(n) + 1e-9;
        os << fmt(" N=%d max|v|=%.6f/%.6f", n, worst, ghz_normalized_max(n));
    }
    return {ok, os.str()};
}

Outcome scaling_measurement() {
    const auto start = clock_type::now();
    const BenchReport r = scaling_report(5, 9, 5);
    const double t = seconds_since(start);
    const double d = r.dense_slope.value_or(0.0), s = r.tensor_slope.value_or(1e9);
    return {d >= 1.8 && s < d && t < 300.0, fmt("dense slope=%.3f tensor slope=%.3f bits/qubit time=%.1fs", d, s, t)};
}

Outcome annealing_contract() {
    std::vector<std::string> failures;
    Rng rng(5);
    AnnealSchedule sched;
    sched.moves_per_cycle = 200;
    for (int i = 0; i < 10; ++i) {
        const int n = 2 + i % 3;
        const DensityMatrix rho = random_density(n, rng);
        const BellTermList t = build(n);
        const std::uint64_t seed = 500 + static_cast<std::uint64_t>(i);
        const OptimizationResult a = anneal(rho, t, sched, seed);
        for (std::size_t k = 1; k < a.trace.size(); ++k)
            if (a.trace[k] < a.trace[k - 1]) {
                failures.push_back(fmt("anneal trace decreases (run %d)", i));
                break;
            }
        const OptimizationResult b = anneal(rho, t, sched, seed);
        if (a.best_value != b.best_value || a.trace != b.trace ||
            a.best_settings.to_angles() != b.best_settings.to_angles())
            failures.push_back(fmt("anneal not reproducible (run %d)", i));
        if (std::abs(value_dense(rho, t, a.best_settings) - a.best_value) > 1e-10)
            failures.push_back(fmt("best_value does not recheck (run %d)", i));
        const OptimizationResult s = simplex_refine(rho, t, a.best_settings, kRefineTolerance);
        for (std::size_t k = 1; k < s.trace.size(); ++k)
            if (s.trace[k] < s.trace[k - 1]) {
                failures.push_back(fmt("simplex trace decreases (run %d)", i));
                break;
            }
    }
    const DensityMatrix rho = random_density(2, 3);
    const OptimizationResult m1 = maximize(rho, Family::chsh(), 3, sched, 11);
    const OptimizationResult m2 = maximize(rho, Family::chsh(), 3, sched, 11);
    if (m1.best_value != m2.best_value || m1.best_settings.to_angles() != m2.best_settings.to_angles())
        failures.push_back("maximize not reproducible");

    Rng u(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0), delta(-10.0, 10.0);
    for (int i = 0; i < 100000; ++i) {
        const double d = delta(u);
        if (metropolis_accept(d, 0.0, unit(u)) != (d >= 0.0)) {
            failures.push_back("accept rule not greedy at T=0");
            break;
        }
    }
    if (!metropolis_accept(0.5, 1.0, 0.999) || metropolis_accept(-1.0, 0.0, 0.99) ||
        !metropolis_accept(-1.0, 1.0, 0.3))
        failures.push_back("accept rule examples");
    std::string detail = failures.empty() ? "all properties hold" : "";
    for (const auto& f : failures) detail += (detail.empty() ? "" : "; ") + f;
    return {failures.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"tsirelson saturation", tsirelson_saturation},
        {"fig1a value", fig1a_value},
        {"oracle agreement", oracle_agreement},
        {"mermin ghz", mermin_ghz},
        {"normalized family maxima", normalized_maxima},
        {"term count law", term_count_law},
        {"recursion mabk consistency", recursion_mabk_consistency},
        {"dual path equivalence", dual_path},
        {"bound properties", bound_properties},
        {"scaling measurement", scaling_measurement},
        {"annealing contract", annealing_contract},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = clock_type::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("[%s] %2zu %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), seconds_since(start));
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
