#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <string>

#include "gtest/gtest.h"

#include "bellmax/bench.hpp"
#include "bellmax/io.hpp"

using namespace bellmax;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("bellmax_bench_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) { return io::read_text(p); }

}  // namespace

TEST(TermCount, CanonicalCounts) {
    EXPECT_EQ(term_count(2), 4u);
    EXPECT_EQ(term_count(3), 4u);
    EXPECT_EQ(term_count(4), 16u);
    EXPECT_EQ(term_count(5), 16u);
    EXPECT_EQ(term_count(6), 64u);
    EXPECT_EQ(term_count(7), 64u);
    EXPECT_EQ(term_count(8), 256u);
    EXPECT_THROW(term_count(1), std::invalid_argument);
}

TEST(TimeEval, CostGrowsWithQubits) {
    const TimingRecord a = time_eval(2, 5);
    const TimingRecord b = time_eval(3, 5);
    EXPECT_GT(a.dense_seconds, 0.0);
    EXPECT_GT(b.dense_seconds / a.dense_seconds, 1.0);
}

TEST(TimeEval, EightQubitsCompletes) {
    const TimingRecord r = time_eval(8, 3);
    EXPECT_EQ(r.n, 8);
    EXPECT_GT(r.dense_seconds, 0.0);
    EXPECT_GT(r.tensor_seconds, 0.0);
}

TEST(TimeEval, Guards) {
    EXPECT_THROW(time_eval(max_qubits() + 1, 3), ResourceError);
    EXPECT_THROW(time_eval(3, 1), ArgumentError);
}

TEST(TimeEval, ConcurrentRunsRejected) {
    {
        detail::BenchGuard held;
        EXPECT_THROW(time_eval(2, 3), std::runtime_error);
        auto other = std::async(std::launch::async, [] { return scaling_report(2, 2, 3); });
        EXPECT_THROW(other.get(), std::runtime_error);
    }
    EXPECT_NO_THROW(time_eval(2, 3));
}

TEST(StepBudget, Arithmetic) {
    AnnealSchedule s;
    s.max_cycles = 100;
    const StepBudget b = step_budget(s, 4, 1);
    EXPECT_EQ(b.evaluations, 100000u);
    EXPECT_EQ(b.term_count, 16u);
    EXPECT_DOUBLE_EQ(b.dense_cost_model, 4096.0);
    EXPECT_EQ(step_budget(s, 4, 2).evaluations, 2 * b.evaluations);
    EXPECT_THROW(step_budget(s, 4, 0), ArgumentError);
}

TEST(StepBudget, BoundsMeasuredEvaluations) {
    AnnealSchedule s;
    s.moves_per_cycle = 200;
    const int restarts = 3;
    const OptimizationResult r = maximize(ghz(2), Family::chsh(), restarts, s, 3);
    EXPECT_LE(r.evaluations, step_budget(s, 2, restarts).evaluations);
}

TEST(LeastSquares, Slope) {
    EXPECT_NEAR(least_squares_slope({1, 2, 3, 4}, {3, 5, 7, 9}), 2.0, 1e-12);
    EXPECT_NEAR(least_squares_slope({0, 1, 2}, {1, 1, 1}), 0.0, 1e-12);
}

TEST(ScalingReport, RowsFilesAndStableCounts) {
    const fs::path dir = scratch_dir("report");
    const BenchReport a = scaling_report(2, 6, 3, dir / "report");
    ASSERT_EQ(a.rows.size(), 5u);
    const std::size_t expected[] = {4, 4, 16, 16, 64};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_EQ(a.rows[i].n, static_cast<int>(i) + 2);
        EXPECT_EQ(a.rows[i].term_count, expected[i]);
        EXPECT_EQ(a.rows[i].evaluations, 5000u * 1000u);
    }
    ASSERT_TRUE(a.dense_slope.has_value());
    ASSERT_TRUE(a.tensor_slope.has_value());

    ASSERT_TRUE(fs::exists(dir / "report.csv"));
    ASSERT_TRUE(fs::exists(dir / "report.json"));
    const std::string csv = slurp(dir / "report.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,term_count,dense_s,tensor_s,evals");
    const auto j = io::parse_json(slurp(dir / "report.json"), "report");
    EXPECT_EQ(j.at("rows").size(), 5u);

    const BenchReport b = scaling_report(2, 6, 3);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(a.rows[i].term_count, b.rows[i].term_count);
    fs::remove_all(dir);
}

TEST(ScalingReport, FewRowsHaveNoSlope) {
    const BenchReport r = scaling_report(2, 3, 3);
    EXPECT_FALSE(r.dense_slope.has_value());
}

TEST(ScalingReport, UnwritablePathIsIoError) {
    EXPECT_THROW(scaling_report(2, 2, 3, fs::path("/nonexistent-dir/x/report")), IoError);
}

TEST(ScalingReport, RangeErrors) {
    EXPECT_THROW(scaling_report(1, 3, 3), ArgumentError);
    EXPECT_THROW(scaling_report(4, 3, 3), ArgumentError);
}

TEST(ReportPaths, StripsKnownExtensions) {
    EXPECT_EQ(report_paths("a/b.csv").first, fs::path("a/b.csv"));
    EXPECT_EQ(report_paths("a/b.json").second, fs::path("a/b.json"));
    EXPECT_EQ(report_paths("a/b").first, fs::path("a/b.csv"));
}
