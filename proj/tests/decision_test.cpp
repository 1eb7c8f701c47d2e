#include <gtest/gtest.h>

#include <optional>

#include "dstbm/decision.hpp"

namespace dstbm {
namespace {

Decision decide_for(std::size_t n_c, std::size_t d_r, double v_c, std::optional<double> v_min) {
    return decide(DecisionInputs(n_c, d_r, v_c, v_min));
}

TEST(Decide, Examples) {
    EXPECT_EQ(decide_for(3, 2, 400, 300), (Decision{false, DecisionReason::InsufficientSpaces}));
    EXPECT_EQ(decide_for(1, 3, 300, 400), (Decision{false, DecisionReason::TooSlow}));
    EXPECT_EQ(decide_for(1, 3, 400, 300), (Decision{true, DecisionReason::Favorable}));
    EXPECT_EQ(decide_for(0, 1, 300, std::nullopt), (Decision{true, DecisionReason::NoCompetition}));
}

TEST(Decide, Boundaries) {
    EXPECT_FALSE(decide_for(2, 2, 400, 300).park);
    EXPECT_FALSE(decide_for(0, 0, 400, std::nullopt).park);
    EXPECT_EQ(decide_for(1, 2, 300, 300), (Decision{true, DecisionReason::Favorable}));
}

TEST(DecisionInputs, RejectsInconsistentInputs) {
    EXPECT_THROW(DecisionInputs(1, 2, 300, std::nullopt), ConfigError);
    EXPECT_THROW(DecisionInputs(0, 2, 300, 200.0), ConfigError);
    EXPECT_THROW(DecisionInputs(0, 2, 0.0, std::nullopt), ConfigError);
    EXPECT_THROW(DecisionInputs(1, 2, 300, -1.0), ConfigError);
}

TEST(Decide, MonotoneInDetectedSpaces) {
    for (std::size_t n_c = 0; n_c <= 10; ++n_c) {
        for (double v_min : {200.0, 300.0, 400.0}) {
            const std::optional<double> vm = n_c ? std::optional<double>(v_min) : std::nullopt;
            bool parked = false;
            for (std::size_t d_r = 0; d_r <= 12; ++d_r) {
                const bool now = decide_for(n_c, d_r, 300.0, vm).park;
                EXPECT_FALSE(parked && !now) << "n_c=" << n_c << " d_r=" << d_r;
                parked = now;
            }
        }
    }
}

} // namespace
} // namespace dstbm
