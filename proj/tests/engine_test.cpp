#include <gtest/gtest.h>

#include <cmath>

#include "dstbm/engine.hpp"
#include "dstbm/experiment.hpp"
#include "scenarios.hpp"
#include "test_support.hpp"

namespace dstbm {
namespace {

using testing::data_path;
using testing::read_file;

TimeIndex minute(double t) { return TimeIndex{static_cast<std::int64_t>(std::floor(t))}; }

const OccupancyTrace& shared_truth() {
    static const OccupancyTrace truth = [] {
        ScenarioConfig cfg;
        cfg.horizon = 2 * minutes_per_week;
        cfg.seed = 7;
        return synthesize_trace(cfg);
    }();
    return truth;
}

ScenarioConfig trace_config(int ds, std::uint64_t seed) {
    ScenarioConfig cfg;
    cfg.mode = Mode::TraceDriven;
    cfg.horizon = 2 * minutes_per_week;
    cfg.sensing.schedule_ds = ds;
    cfg.seed = seed;
    return cfg;
}

TEST(ResolveOutcome, Examples) {
    EXPECT_EQ(resolve_outcome(true, 2, 1), Outcome::Parked);
    EXPECT_EQ(resolve_outcome(true, 1, 1), Outcome::FailedToPark);
    EXPECT_EQ(resolve_outcome(false, 1, 0), Outcome::DeclinedCouldHave);
    EXPECT_EQ(resolve_outcome(false, 0, 0), Outcome::DeclinedCorrectly);
}

TEST(Accuracy, Examples) {
    EXPECT_DOUBLE_EQ(accuracy({8, 1, 1, 0}), 0.9);
    EXPECT_THROW(accuracy({}), NoData);
    EXPECT_FALSE(try_accuracy({}).has_value());
    ConfusionCounts c;
    c.add(Outcome::Parked);
    c.add(Outcome::FailedToPark);
    c.add(Outcome::DeclinedCouldHave);
    c.add(Outcome::DeclinedCorrectly);
    EXPECT_EQ(c, (ConfusionCounts{1, 1, 1, 1}));
}

TEST(EffectiveSpotReach, Clamp) {
    EXPECT_EQ(effective_spot_reach(6.0, std::nullopt), 6.0);
    EXPECT_EQ(effective_spot_reach(6.0, 8.0), 8.0);
    EXPECT_EQ(effective_spot_reach(9.0, 8.0), 9.0);
}

TEST(EffectiveSpotReach, ThreeCarCascade) {
    // region 300 m: car A enters 0 at 100 m/min (own reach 3), B enters 1 at
    // 600 m/min (own 1.5, clamped to 3), C enters 2 at 150 m/min (own 4).
    ScenarioConfig cfg;
    cfg.mode = Mode::TraceDriven;
    cfg.region_length = 300.0;
    cfg.horizon = 10;
    cfg.window = 10;
    const OccupancyTrace truth("r", 0, 1, {"a", "b", "c"},
                               std::vector<std::vector<bool>>(3, std::vector<bool>(10, false)));
    const std::vector<ScriptedArrival> arrivals{{0.0, 100.0}, {1.0, 600.0}, {2.0, 150.0}};
    const auto r = run(cfg, truth, arrivals);
    ASSERT_EQ(r.cars.size(), 3u);
    EXPECT_DOUBLE_EQ(r.cars[0].spot_reach_time, 3.0);
    EXPECT_DOUBLE_EQ(r.cars[1].spot_reach_time, 3.0);
    EXPECT_DOUBLE_EQ(r.cars[2].spot_reach_time, 4.0);
    EXPECT_EQ(r.cars[1].decision.reason, DecisionReason::Favorable);
    EXPECT_EQ(r.cars[2].n_c, 2u);
    EXPECT_EQ(r.report.overall, (ConfusionCounts{3, 0, 0, 0}));
    for (const auto& car : r.cars) EXPECT_GE(car.spot_reach_time, car.entry_time + car.travel_time);
}

class MicroGolden : public ::testing::TestWithParam<testing::MicroScenario> {};

TEST_P(MicroGolden, MatchesHandTracedLog) {
    const auto& s = GetParam();
    const auto r = testing::run_micro(s);
    EXPECT_EQ(event_log_csv(r.log), read_file(data_path(s.golden)));
}

INSTANTIATE_TEST_SUITE_P(Engine, MicroGolden,
                         ::testing::Values(testing::two_cars_trace_driven(),
                                           testing::queued_decliner_trace_driven(),
                                           testing::closed_loop_micro()));

TEST(Engine, MicroCounts) {
    EXPECT_EQ(testing::run_micro(testing::two_cars_trace_driven()).report.overall,
              (ConfusionCounts{2, 0, 0, 0}));
    EXPECT_EQ(testing::run_micro(testing::queued_decliner_trace_driven()).report.overall,
              (ConfusionCounts{1, 1, 0, 0}));
    const auto closed = testing::run_micro(testing::closed_loop_micro());
    EXPECT_EQ(closed.report.overall, (ConfusionCounts{1, 1, 0, 1}));
    EXPECT_NEAR(*closed.report.p_a, 2.0 / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(*closed.cars[0].departure_time, 7.0);
}

TEST(Engine, ZeroArrivals) {
    ScenarioConfig cfg;
    cfg.lambda = 1e-12;
    cfg.horizon = 3 * minutes_per_week;
    const auto r = run(cfg);
    EXPECT_EQ(r.report.decisions, 0u);
    EXPECT_EQ(r.report.overall.total(), 0u);
    EXPECT_FALSE(r.report.p_a.has_value());
    ASSERT_EQ(r.report.windows.size(), 3u);
    for (const auto& w : r.report.windows) {
        EXPECT_TRUE(w.closed);
        EXPECT_FALSE(w.p_a.has_value());
    }
}

TEST(Engine, ConfigErrors) {
    ScenarioConfig cfg;
    cfg.mode = Mode::TraceDriven;
    EXPECT_THROW(run(cfg), ConfigError);
    cfg.horizon = 3 * minutes_per_week;
    EXPECT_THROW(run(cfg, shared_truth()), ConfigError); // trace only two weeks long
    cfg.mode = Mode::ClosedLoop;
    EXPECT_THROW(run(cfg, shared_truth()), ConfigError);
    cfg.horizon = 10;
    EXPECT_THROW(run(cfg), ConfigError); // horizon < window
    cfg = {};
    cfg.spots = 0;
    EXPECT_THROW(run(cfg), ConfigError);
    cfg = {};
    cfg.sensing.schedule_ds = -1;
    EXPECT_THROW(run(cfg), ConfigError);
}

TEST(Engine, WindowsPartitionHorizon) {
    ScenarioConfig cfg;
    cfg.horizon = 25000;
    cfg.window = 10080;
    const auto r = run(cfg);
    ASSERT_EQ(r.report.windows.size(), 3u);
    EXPECT_EQ(r.report.windows.back().start, 20160);
    EXPECT_EQ(r.report.windows.back().end, 25000);
    ConfusionCounts sum;
    for (const auto& w : r.report.windows) sum += w.counts;
    EXPECT_EQ(sum, r.report.overall);
}

TEST(Engine, FixedSensingReadsGroundTruthAtDecision) {
    const auto& truth = shared_truth();
    const auto r = run(trace_config(0, 3), truth);
    ASSERT_GT(r.cars.size(), 1000u);
    std::size_t gap_free_checks = 0;
    for (const auto& car : r.cars) {
        EXPECT_EQ(car.d_r, free_spaces_at(truth, minute(car.entry_time)));
        EXPECT_FALSE(car.warmup);
        if (!car.outcome) continue;
        // With no competitors and no change across the travel gap, the
        // prediction cannot be wrong.
        if (car.n_c == 0 && free_spaces_at(truth, minute(car.entry_time)) ==
                                free_spaces_at(truth, minute(car.spot_reach_time))) {
            ++gap_free_checks;
            EXPECT_TRUE(*car.outcome == Outcome::Parked ||
                        *car.outcome == Outcome::DeclinedCorrectly);
        }
    }
    EXPECT_GT(gap_free_checks, 1000u);
}

TEST(Engine, MobileSensingMatchesDetect) {
    const auto& truth = shared_truth();
    for (int ds : {15, 50}) {
        const auto cfg = trace_config(ds, 5);
        const auto r = run(cfg, truth);
        for (const auto& car : r.cars) {
            EXPECT_EQ(car.d_r, detect(truth, cfg.sensing, minute(car.entry_time)).free_count);
        }
    }
}

TEST(Engine, WarmupDecisions) {
    const auto& truth = shared_truth();
    auto cfg = trace_config(60, 2);
    cfg.sensing.scan_offset = 45;
    const auto r = run(cfg, truth);
    ASSERT_GT(r.report.warmup_decisions, 0u);
    std::uint64_t flagged = 0, flagged_resolved = 0;
    for (const auto& car : r.cars) {
        EXPECT_EQ(car.warmup, car.entry_time < 45.0);
        if (car.warmup) {
            ++flagged;
            EXPECT_EQ(car.d_r, 0u);
            EXPECT_FALSE(car.decision.park);
            if (car.outcome) ++flagged_resolved;
        }
    }
    EXPECT_EQ(flagged, r.report.warmup_decisions);
    std::size_t logged = 0;
    for (const auto& row : r.log) logged += row.event == LogEvent::DecideWarmup;
    EXPECT_EQ(logged, flagged);

    cfg.exclude_warmup = true;
    const auto ex = run(cfg, truth);
    EXPECT_EQ(ex.report.excluded, flagged_resolved);
    EXPECT_EQ(ex.report.overall.total() + flagged_resolved, r.report.overall.total());
}

TEST(Engine, ConservationAndDeterminism) {
    const auto& truth = shared_truth();
    for (int ds : {0, 35}) {
        const auto cfg = trace_config(ds, 11);
        const auto a = run(cfg, truth);
        const auto b = run(cfg, truth);
        EXPECT_EQ(a.log, b.log);
        EXPECT_EQ(event_log_csv(a.log), event_log_csv(b.log));

        std::uint64_t resolved = 0;
        for (const auto& car : a.cars) resolved += car.outcome.has_value();
        EXPECT_EQ(a.report.overall.total(), resolved);
        EXPECT_EQ(a.report.resolved + a.report.unresolved, a.report.decisions);
        EXPECT_EQ(a.report.decisions, a.cars.size());
        for (const auto& w : a.report.windows) {
            ASSERT_TRUE(w.p_a.has_value());
            EXPECT_GE(*w.p_a, 0.0);
            EXPECT_LE(*w.p_a, 1.0);
        }
    }
    EXPECT_NE(run(trace_config(0, 1), truth).log, run(trace_config(0, 2), truth).log);
}

TEST(Engine, ClosedLoopOccupancyFollowsParkedCars) {
    ScenarioConfig cfg;
    cfg.horizon = 3000;
    cfg.window = 1000;
    cfg.seed = 21;
    cfg.record_trace = true;
    const auto r = run(cfg);
    ASSERT_TRUE(r.trace.has_value());
    const auto& t = *r.trace;
    ASSERT_EQ(t.length(), 3000u);
    for (std::int64_t m = 0; m < cfg.horizon; ++m) {
        std::size_t occupied = 0;
        for (const auto& car : r.cars) {
            if (car.outcome == Outcome::Parked && car.spot_reach_time <= static_cast<double>(m) &&
                *car.departure_time > static_cast<double>(m)) {
                ++occupied;
            }
        }
        ASSERT_EQ(occupied_spaces_at(t, TimeIndex{m}), occupied) << "minute " << m;
    }
    for (const auto& car : r.cars) {
        EXPECT_EQ(car.departure_time.has_value(), car.outcome == Outcome::Parked);
    }
}

TEST(Engine, TraceDrivenLeavesTruthUntouched) {
    const auto before = shared_truth();
    run(trace_config(15, 4), shared_truth());
    EXPECT_EQ(before, shared_truth());
}

TEST(EventLog, Format) {
    const std::vector<LogRow> rows{
        {1.5, LogEvent::Decide, 0, 2, 3, 412.25, 300.0, 1, std::nullopt},
        {2.25, LogEvent::Resolve, 0, 2, 3, 412.25, 300.0, 1, Outcome::FailedToPark},
    };
    EXPECT_EQ(event_log_csv(rows),
              "time,event,car_id,n_c,d_r,v_c,v_min,d_m,outcome\n"
              "1.500000,decide,0,2,3,412.250,300.000,1,\n"
              "2.250000,resolve,0,2,3,412.250,300.000,1,failed_to_park\n");
}

} // namespace
} // namespace dstbm
