#pragma once

// Maximization of Tr(rho B) over the 4N setting angles: simulated annealing
// with Metropolis acceptance and exponential cooling, Nelder-Mead
// refinement, a coarse grid search, and a multi-restart driver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "bellmax/bellops.hpp"
#include "bellmax/qlinalg.hpp"

namespace bellmax {

struct AnnealSchedule {
    double t0 = 1.0;
    double lambda = 0.01;
    int moves_per_cycle = 1000;
    int max_cycles = 5000;
    double stop_epsilon = 1e-6;
    int stop_window = 50;
    double freeze_ratio = 0.01;  // convergence test armed once T <= freeze_ratio * t0

    double temperature(int cycle) const { return t0 * std::exp(-lambda * cycle); }

    void validate() const {
        if (!(t0 > 0.0)) throw ArgumentError("schedule: t0 must be positive");
        if (!(lambda > 0.0)) throw ArgumentError("schedule: lambda must be positive");
        if (!(stop_epsilon > 0.0)) throw ArgumentError("schedule: stop_epsilon must be positive");
        if (moves_per_cycle < 1) throw ArgumentError("schedule: moves_per_cycle must be >= 1");
        if (max_cycles < 1) throw ArgumentError("schedule: max_cycles must be >= 1");
        if (stop_window < 1) throw ArgumentError("schedule: stop_window must be >= 1");
        if (!(freeze_ratio > 0.0 && freeze_ratio <= 1.0))
            throw ArgumentError("schedule: freeze_ratio must be in (0, 1]");
    }
};

enum class Termination { converged, max_cycles };

inline const char* to_string(Termination t) {
    return t == Termination::converged ? "converged" : "max_cycles";
}

struct OptimizationResult {
    double best_value = -std::numeric_limits<double>::infinity();
    MeasurementSettings best_settings;
    std::vector<double> trace;         // best-so-far after each cycle (iteration for simplex)
    std::vector<double> temperatures;  // temperature used in each cycle; empty for simplex
    std::uint64_t evaluations = 0;
    Termination terminated = Termination::max_cycles;
    int cycles_run = 0;
    std::vector<std::uint64_t> restart_evaluations;  // filled by maximize only
};

/// Maximization convention: improvements always pass, otherwise accept with
/// probability exp(delta / T). T <= 0 is the greedy limit.
inline bool metropolis_accept(double delta, double temperature, double u) {
    if (delta >= 0.0) return true;
    if (!(temperature > 0.0)) return false;
    return u < std::exp(delta / temperature);
}

inline double proposal_width(double temperature, double t0) {
    return std::numbers::pi * std::min(1.0, std::max(0.0, temperature) / t0);
}

/// Fold theta into [0, pi] by reflection at the poles.
inline double reflect_theta(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(theta, two_pi);
    if (y < 0.0) y += two_pi;
    if (y > std::numbers::pi) y = two_pi - y;
    return y;
}

inline double wrap_phi(double phi) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double y = std::fmod(phi, two_pi);
    if (y < 0.0) y += two_pi;
    if (y >= two_pi) y = 0.0;
    return y;
}

namespace detail {

/// Flattened angle k is a theta when k is even.
inline void move_angle(std::vector<double>& angles, std::size_t k, double delta) {
    angles[k] = (k % 2 == 0) ? reflect_theta(angles[k] + delta) : wrap_phi(angles[k] + delta);
}

inline std::size_t draw_angle_index(std::size_t n_angles, Rng& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n_angles - 1)(rng);
}

inline double draw_gaussian(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

inline double draw_unit(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline void require_state_parties(const DensityMatrix& rho, const BellTermList& t, const char* what) {
    if (rho.n_qubits() != t.n_parties)
        throw ArgumentError(std::string(what) + ": state has " + std::to_string(rho.n_qubits()) +
                            " qubits but operator has " + std::to_string(t.n_parties) + " parties");
}

}  // namespace detail

/// Perturb one uniformly chosen angle by N(0, sigma^2), sigma = pi min(1, T/t0).
inline MeasurementSettings propose(const MeasurementSettings& s, double temperature, double t0, Rng& rng) {
    std::vector<double> angles = s.to_angles();
    if (angles.empty()) return s;
    const std::size_t k = detail::draw_angle_index(angles.size(), rng);
    const double delta = proposal_width(temperature, t0) * detail::draw_gaussian(rng);
    detail::move_angle(angles, k, delta);
    return MeasurementSettings::from_angles(angles);
}

/// Cost function over setting vectors. The correlation tensor path is used
/// up to six parties, dense assembly beyond.
class BellObjective {
public:
    static constexpr int kTensorPathMaxParties = 6;

    BellObjective(const DensityMatrix& rho, const BellTermList& t) : impl_(make(rho, t)) {}

    int n_parties() const {
        return std::visit(
            [](const auto& e) {
                if constexpr (std::is_same_v<std::decay_t<decltype(e)>, Dense>) return e.terms.n_parties;
                else return e.n_parties();
            },
            impl_);
    }

    double operator()(std::span<const Vec3> vecs) const {
        return std::visit(
            [&](const auto& e) {
                if constexpr (std::is_same_v<std::decay_t<decltype(e)>, Dense>)
                    return detail::trace_product(e.rho, detail::assemble_vectors(e.terms, vecs));
                else return e(vecs);
            },
            impl_);
    }

    double operator()(std::span<const double> angles) const {
        std::vector<Vec3> vecs(angles.size() / 2);
        for (std::size_t k = 0; k < vecs.size(); ++k) vecs[k] = bloch_vector(angles[2 * k], angles[2 * k + 1]);
        return (*this)(std::span<const Vec3>(vecs));
    }

private:
    struct Dense {
        ComplexMatrix rho;
        BellTermList terms;
    };
    using Impl = std::variant<TensorEvaluator, Dense>;

    static Impl make(const DensityMatrix& rho, const BellTermList& t) {
        detail::require_state_parties(rho, t, "objective");
        if (t.n_parties <= kTensorPathMaxParties) return TensorEvaluator(correlation_tensor(rho), t);
        return Dense{rho.matrix(), canonicalize(t)};
    }

    Impl impl_;
};

inline MeasurementSettings random_settings(int n_parties, Rng& rng) {
    std::vector<double> angles(4 * static_cast<std::size_t>(n_parties));
    for (std::size_t k = 0; k < angles.size(); k += 2) {
        angles[k] = std::acos(1.0 - 2.0 * detail::draw_unit(rng));
        angles[k + 1] = wrap_phi(2.0 * std::numbers::pi * detail::draw_unit(rng));
    }
    return MeasurementSettings::from_angles(angles);
}

/// Simulated annealing from uniformly random settings. Each cycle makes
/// `moves_per_cycle` single-angle Metropolis moves at T = t0 exp(-lambda s),
/// each scored against the full operator. Once the temperature has fallen to
/// freeze_ratio * t0, stops as soon as the best value gained less than
/// stop_epsilon over the last stop_window cycles.
inline OptimizationResult anneal(const DensityMatrix& rho, const BellTermList& t,
                                 const AnnealSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    detail::require_state_parties(rho, t, "anneal");
    const BellObjective cost(rho, t);
    Rng rng(seed);

    std::vector<double> angles = random_settings(t.n_parties, rng).to_angles();
    std::vector<Vec3> vecs(angles.size() / 2);
    for (std::size_t k = 0; k < vecs.size(); ++k) vecs[k] = bloch_vector(angles[2 * k], angles[2 * k + 1]);

    OptimizationResult r;
    double current = cost(std::span<const Vec3>(vecs));
    r.evaluations = 1;
    r.best_value = current;
    std::vector<double> best_angles = angles;

    for (int cycle = 0; cycle < schedule.max_cycles; ++cycle) {
        const double temperature = schedule.temperature(cycle);
        const double width = proposal_width(temperature, schedule.t0);
        for (int m = 0; m < schedule.moves_per_cycle; ++m) {
            const std::size_t k = detail::draw_angle_index(angles.size(), rng);
            const double delta = width * detail::draw_gaussian(rng);
            const double old_angle = angles[k];
            const Vec3 old_vec = vecs[k / 2];
            detail::move_angle(angles, k, delta);
            const std::size_t pair = k & ~std::size_t{1};
            vecs[k / 2] = bloch_vector(angles[pair], angles[pair + 1]);
            const double candidate = cost(std::span<const Vec3>(vecs));
            ++r.evaluations;
            if (metropolis_accept(candidate - current, temperature, detail::draw_unit(rng))) {
                current = candidate;
                if (current > r.best_value) {
                    r.best_value = current;
                    best_angles = angles;
                }
            } else {
                angles[k] = old_angle;
                vecs[k / 2] = old_vec;
            }
        }
        r.trace.push_back(r.best_value);
        r.temperatures.push_back(temperature);
        r.cycles_run = cycle + 1;
        if (cycle >= schedule.stop_window && temperature <= schedule.freeze_ratio * schedule.t0 &&
            r.trace[static_cast<std::size_t>(cycle)] -
                    r.trace[static_cast<std::size_t>(cycle - schedule.stop_window)] <
                schedule.stop_epsilon) {
            r.terminated = Termination::converged;
            break;
        }
    }
    r.best_settings = MeasurementSettings::from_angles(best_angles);
    return r;
}

inline constexpr double kSimplexStep = 0.05;

/// Nelder-Mead maximization over the raw angles, starting from a simplex
/// with 0.05 rad offsets around `start`. Stops when the vertex value spread
/// drops below `tol` or after 2000 N iterations.
inline OptimizationResult simplex_refine(const DensityMatrix& rho, const BellTermList& t,
                                         const MeasurementSettings& start, double tol) {
    detail::require_state_parties(rho, t, "simplex_refine");
    detail::require_parties(t, start.n_parties(), "simplex_refine");
    const BellObjective cost(rho, t);
    const std::size_t dim = 4 * static_cast<std::size_t>(t.n_parties);
    const int max_iterations = 2000 * t.n_parties;

    OptimizationResult r;
    auto eval = [&](const std::vector<double>& x) {
        ++r.evaluations;
        return cost(std::span<const double>(x));
    };

    std::vector<std::vector<double>> x(dim + 1, start.to_angles());
    std::vector<double> f(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) {
        if (i > 0) x[i][i - 1] += kSimplexStep;
        f[i] = eval(x[i]);
    }
    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), xr(dim), xe(dim), xc(dim);

    auto point = [&](std::vector<double>& out, double coef, const std::vector<double>& toward) {
        for (std::size_t k = 0; k < dim; ++k) out[k] = centroid[k] + coef * (toward[k] - centroid[k]);
    };

    r.terminated = Termination::max_cycles;
    for (int iter = 0; iter < max_iterations; ++iter) {
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
        const std::size_t best = order.front(), worst = order.back(), second_worst = order[dim - 1];
        r.trace.push_back(f[best]);
        r.cycles_run = iter + 1;
        if (f[best] - f[worst] < tol) {
            r.terminated = Termination::converged;
            break;
        }
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += x[order[i]][k] / static_cast<double>(dim);

        point(xr, -1.0, x[worst]);
        const double fr = eval(xr);
        if (fr > f[best]) {
            point(xe, -2.0, x[worst]);
            const double fe = eval(xe);
            if (fe > fr) { x[worst] = xe; f[worst] = fe; }
            else { x[worst] = xr; f[worst] = fr; }
            continue;
        }
        if (fr > f[second_worst]) {
            x[worst] = xr;
            f[worst] = fr;
            continue;
        }
        const bool outside = fr > f[worst];
        point(xc, outside ? -0.5 : 0.5, x[worst]);
        const double fc = eval(xc);
        if (outside ? fc >= fr : fc > f[worst]) {
            x[worst] = xc;
            f[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (std::size_t k = 0; k < dim; ++k) x[i][k] = x[best][k] + 0.5 * (x[i][k] - x[best][k]);
            f[i] = eval(x[i]);
        }
    }
    const auto best_it = std::max_element(f.begin(), f.end());
    const auto& bx = x[static_cast<std::size_t>(best_it - f.begin())];
    r.best_settings = MeasurementSettings::canonical_from_angles(bx);
    r.best_value = *best_it;
    return r;
}

struct GridSeedResult {
    MeasurementSettings settings;
    double value = 0.0;
    std::uint64_t evaluations = 0;
};

/// Exhaustive search over theta in {pi (i + 1/2) / r}, phi in {2 pi j / r}
/// for every one of the 4N angles: r^(4N) evaluations.
inline GridSeedResult grid_seed(const DensityMatrix& rho, const BellTermList& t, int resolution) {
    detail::require_state_parties(rho, t, "grid_seed");
    if (t.n_parties > 3) throw ResourceError("grid_seed: at most 3 parties");
    if (resolution < 1 || resolution > 6) throw ResourceError("grid_seed: resolution must be in [1, 6]");
    const BellObjective cost(rho, t);
    const std::size_t n_angles = 4 * static_cast<std::size_t>(t.n_parties);
    const auto r = static_cast<double>(resolution);
    auto angle_at = [&](std::size_t k, int i) {
        return (k % 2 == 0) ? std::numbers::pi * (i + 0.5) / r : 2.0 * std::numbers::pi * i / r;
    };

    std::vector<int> digits(n_angles, 0);
    std::vector<double> angles(n_angles);
    for (std::size_t k = 0; k < n_angles; ++k) angles[k] = angle_at(k, 0);
    std::vector<Vec3> vecs(n_angles / 2);
    for (std::size_t k = 0; k < vecs.size(); ++k) vecs[k] = bloch_vector(angles[2 * k], angles[2 * k + 1]);

    GridSeedResult out;
    out.value = -std::numeric_limits<double>::infinity();
    std::vector<double> best_angles = angles;
    while (true) {
        const double v = cost(std::span<const Vec3>(vecs));
        ++out.evaluations;
        if (v > out.value) {
            out.value = v;
            best_angles = angles;
        }
        std::size_t k = n_angles;
        while (k > 0) {
            --k;
            auto& dgt = digits[k];
            dgt = (dgt + 1) % resolution;
            angles[k] = angle_at(k, dgt);
            const std::size_t pair = k & ~std::size_t{1};
            vecs[k / 2] = bloch_vector(angles[pair], angles[pair + 1]);
            if (dgt != 0) break;
            if (k == 0) {
                out.settings = MeasurementSettings::from_angles(best_angles);
                return out;
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Families and the restart driver

enum class FamilyKind { chsh, mermin, mabk, recursion };

struct Family {
    FamilyKind kind = FamilyKind::recursion;
    int n = 2;

    static Family chsh() { return {FamilyKind::chsh, 2}; }
    static Family mermin() { return {FamilyKind::mermin, 3}; }
    static Family mabk() { return {FamilyKind::mabk, 4}; }
    static Family recursion(int n) { return {FamilyKind::recursion, n}; }

    /// `n` <= 0 means "unspecified"; fixed-size families reject a mismatch.
    static Family parse(const std::string& name, int n) {
        auto fixed = [&](Family f) {
            if (n > 0 && n != f.n)
                throw ArgumentError("family " + name + " is defined for " + std::to_string(f.n) +
                                    " parties, not " + std::to_string(n));
            return f;
        };
        if (name == "chsh") return fixed(chsh());
        if (name == "mermin") return fixed(mermin());
        if (name == "mabk") return fixed(mabk());
        if (name == "recursion") {
            if (n < 2 || n > max_qubits())
                throw ArgumentError("family recursion needs 2 <= n <= " + std::to_string(max_qubits()));
            return recursion(n);
        }
        throw ArgumentError("unknown family '" + name + "' (expected chsh, mermin, mabk, recursion)");
    }

    std::string name() const {
        switch (kind) {
            case FamilyKind::chsh: return "chsh";
            case FamilyKind::mermin: return "mermin";
            case FamilyKind::mabk: return "mabk";
            case FamilyKind::recursion: return "recursion";
        }
        return "recursion";
    }

    BellTermList terms() const {
        switch (kind) {
            case FamilyKind::chsh: return chsh_terms();
            case FamilyKind::mermin: return mermin3();
            case FamilyKind::mabk: return mabk4();
            case FamilyKind::recursion: return build(n);
        }
        return build(n);
    }

private:
    static BellTermList chsh_terms() { return bellmax::chsh(); }
};

/// Independent stream per restart (splitmix64 finalizer over seed and index).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr double kRefineTolerance = 1e-12;

/// Best of `restarts` annealing runs, each polished by simplex_refine.
/// Restarts run concurrently; the reduction keeps the lowest index on ties,
/// so the result does not depend on the worker count.
inline OptimizationResult maximize(const DensityMatrix& rho, const Family& family, int restarts,
                                   const AnnealSchedule& schedule, std::uint64_t seed) {
    if (restarts < 1) throw ArgumentError("maximize: restarts must be >= 1");
    schedule.validate();
    const BellTermList terms = family.terms();
    detail::require_state_parties(rho, terms, "maximize");

    auto run_one = [&](int k) {
        OptimizationResult a = anneal(rho, terms, schedule, derive_seed(seed, static_cast<std::uint64_t>(k)));
        OptimizationResult s = simplex_refine(rho, terms, a.best_settings, kRefineTolerance);
        if (s.best_value > a.best_value) {
            a.best_value = s.best_value;
            a.best_settings = s.best_settings;
        }
        a.evaluations += s.evaluations;
        return a;
    };

    std::vector<OptimizationResult> runs(static_cast<std::size_t>(restarts));
    const int workers = std::max(1, std::min<int>(restarts, static_cast<int>(std::thread::hardware_concurrency())));
    for (int lo = 0; lo < restarts; lo += workers) {
        const int hi = std::min(restarts, lo + workers);
        if (hi - lo == 1) {
            runs[static_cast<std::size_t>(lo)] = run_one(lo);
            continue;
        }
        std::vector<std::future<OptimizationResult>> futures;
        for (int k = lo; k < hi; ++k) futures.push_back(std::async(std::launch::async, run_one, k));
        for (int k = lo; k < hi; ++k) runs[static_cast<std::size_t>(k)] = futures[static_cast<std::size_t>(k - lo)].get();
    }

    std::size_t winner = 0;
    for (std::size_t k = 1; k < runs.size(); ++k)
        if (runs[k].best_value > runs[winner].best_value) winner = k;
    OptimizationResult out = runs[winner];
    out.evaluations = 0;
    for (const auto& run : runs) {
        out.restart_evaluations.push_back(run.evaluations);
        out.evaluations += run.evaluations;
    }
    return out;
}

}  // namespace bellmax
