#include <cmath>
#include <numbers>

#include "gtest/gtest.h"

#include "bellmax/anneal.hpp"
#include "bellmax/oracles.hpp"

using namespace bellmax;

namespace {
const double tsirelson = 2.0 * std::numbers::sqrt2;
}

TEST(Horodecki, Examples) {
    EXPECT_NEAR(horodecki_chsh(ghz(2)), tsirelson, 1e-12);
    EXPECT_NEAR(horodecki_chsh(fig1a_state()), 2.0 / 3.0, 1e-12);
    EXPECT_NEAR(horodecki_chsh(diag_density({1.0, 0.0, 0.0, 0.0}, 2)), 2.0, 1e-12);
    EXPECT_NEAR(horodecki_chsh(diag_density({0.25, 0.25, 0.25, 0.25}, 2)), 0.0, 1e-12);
}

TEST(Horodecki, RequiresTwoQubits) {
    EXPECT_THROW(horodecki_chsh(ghz(3)), ArgumentError);
}

TEST(Horodecki, WithinTsirelson) {
    Rng rng(1);
    for (int i = 0; i < 500; ++i) {
        const double v = horodecki_chsh(random_density(2, rng));
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, tsirelson + 1e-12);
    }
}

TEST(GhzMax, Values) {
    EXPECT_NEAR(ghz_normalized_max(2), tsirelson, 1e-15);
    EXPECT_NEAR(ghz_normalized_max(3), 4.0, 1e-15);
    EXPECT_NEAR(ghz_normalized_max(5), 8.0, 1e-15);
}

TEST(Fixtures, ReevaluateExactly) {
    const auto all = fixtures();
    ASSERT_EQ(all.size(), 3u);
    for (const Fixture& f : all) {
        const DensityMatrix rho = fixture_state(f.state);
        ASSERT_EQ(rho.n_qubits(), f.n_parties) << f.name;
        EXPECT_NEAR(value_dense(rho, f.family.terms(), f.settings), f.expected_value, 1e-10) << f.name;
    }
    EXPECT_THROW(fixture_state("nope"), ArgumentError);
}

TEST(Fixtures, ChshOptimalMatchesOracle) {
    const Fixture f = fixtures()[0];
    EXPECT_NEAR(f.expected_value, horodecki_chsh(ghz(2)), 1e-12);
}

// Coarse grid polished by simplex can only approach the analytic maximum
// from below.
TEST(OracleProperty, GridAndSimplexNeverExceed) {
    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const DensityMatrix rho = random_density(2, rng);
        const double oracle = horodecki_chsh(rho);
        const GridSeedResult g = grid_seed(rho, chsh(), 2);
        const OptimizationResult r = simplex_refine(rho, chsh(), g.settings, kRefineTolerance);
        EXPECT_LE(g.value, oracle + 1e-6) << i;
        EXPECT_LE(r.best_value, oracle + 1e-6) << i;
    }
}

TEST(OracleProperty, MaximizeReachesOracle) {
    Rng rng(8);
    AnnealSchedule s;
    s.moves_per_cycle = 200;
    int reached = 0;
    const int states = 60;
    for (int i = 0; i < states; ++i) {
        const DensityMatrix rho = random_density(2, rng);
        const double oracle = horodecki_chsh(rho);
        const double v = maximize(rho, Family::chsh(), 4, s, 1000 + static_cast<std::uint64_t>(i)).best_value;
        EXPECT_LE(v, oracle + 1e-6) << i;
        reached += std::abs(v - oracle) <= 1e-2;
    }
    EXPECT_GE(reached, 57);
}
