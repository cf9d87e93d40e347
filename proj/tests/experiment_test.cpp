#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "test_support.hpp"

namespace marc {
namespace {

SweepConfig small_config() {
    SweepConfig cfg;
    cfg.users = 3;
    cfg.user_antennas = {2, 2, 2};
    cfg.relay_antennas = 2;
    cfg.user_power = {10.0, 10.0, 10.0};
    cfg.snr_db = {0.0, 10.0, 20.0, 30.0};
    cfg.trials = 40;
    cfg.master_seed = 7;
    return cfg;
}

TEST(RunSweep, SingleTrialMatchesDirectEvaluation) {
    SweepConfig cfg = small_config();
    cfg.trials = 1;
    cfg.snr_db = {10.0};
    const auto r = run_sweep(cfg);
    ASSERT_EQ(r.points.size(), 1u);
    const auto c = sample_rayleigh(3, cfg.user_antennas, 2, derive_seed(7, 0));
    const PowerBudget p{cfg.user_power, 10.0};
    EXPECT_EQ(r.points[0].joint_mean, joint_sum_rate(c, p).sum_rate);
    EXPECT_EQ(r.points[0].tdma_mean, tdma_sum_rate(c, p).sum_rate);
    EXPECT_EQ(r.points[0].joint_se, 0.0);
    EXPECT_EQ(r.points[0].trials, 1u);
}

TEST(RunSweep, DeterministicAcrossWorkerCounts) {
    const auto cfg = small_config();
    const auto a = format_csv(run_sweep(cfg, 1));
    EXPECT_EQ(a, format_csv(run_sweep(cfg, 1)));
    EXPECT_EQ(a, format_csv(run_sweep(cfg, 4)));
}

TEST(RunSweep, TdmaNeverBelowJoint) {
    const auto r = run_sweep(small_config());
    for (const auto& p : r.points) {
        EXPECT_GE(p.tdma_mean, p.joint_mean - 1e-12);
        EXPECT_GE(p.gain_pct, 0.0);
        EXPECT_GT(p.joint_se, 0.0);
    }
}

TEST(RunSweep, GainGrowsWithRelaySnr) {
    // Loose check; the ordering is a trend, not a theorem.
    const auto r = run_sweep(small_config());
    EXPECT_LT(r.points.front().gain_pct, r.points.back().gain_pct);
}

TEST(RunSweep, RejectsBadConfig) {
    SweepConfig cfg = small_config();
    cfg.trials = 0;
    EXPECT_THROW(run_sweep(cfg), Error);
    cfg = small_config();
    cfg.user_power.pop_back();
    EXPECT_THROW(run_sweep(cfg), Error);
}

TEST(Csv, EmptyGridIsHeaderOnly) {
    SweepConfig cfg = small_config();
    cfg.snr_db.clear();
    EXPECT_EQ(format_csv(run_sweep(cfg)), std::string(kSweepCsvHeader) + "\n");
}

TEST(Csv, OnePointHasTwoLines) {
    SweepConfig cfg = small_config();
    cfg.snr_db = {5.0};
    const auto text = format_csv(run_sweep(cfg));
    EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

TEST(Csv, RoundTripWithinPrintPrecision) {
    const auto r = run_sweep(small_config());
    std::istringstream in(format_csv(r));
    const auto back = parse_csv(in);
    ASSERT_EQ(back.points.size(), r.points.size());
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        EXPECT_NEAR(back.points[i].joint_mean, r.points[i].joint_mean, 1e-10);
        EXPECT_NEAR(back.points[i].tdma_mean, r.points[i].tdma_mean, 1e-10);
        EXPECT_NEAR(back.points[i].gain_pct, r.points[i].gain_pct, 1e-9);
        EXPECT_EQ(back.points[i].trials, r.points[i].trials);
    }
}

TEST(Csv, MalformedAndIoErrors) {
    std::istringstream bad_header("x,y\n");
    EXPECT_THROW(parse_csv(bad_header), Error);
    std::istringstream bad_row(std::string(kSweepCsvHeader) + "\n1,2,3\n");
    EXPECT_THROW(parse_csv(bad_row), Error);
    try {
        write_csv(SweepResult{}, "/nonexistent/dir/out.csv");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IoError);
    }
}

TEST(Csv, FileRoundTrip) {
    const auto path = (std::filesystem::temp_directory_path() / "marc_experiment_test.csv").string();
    const auto r = run_sweep(small_config());
    write_csv(r, path);
    EXPECT_EQ(format_csv(load_csv(path)), format_csv(r));
    std::filesystem::remove(path);
}

}  // namespace
}  // namespace marc
