#include <gtest/gtest.h>

#include "ctia_ipc/wtc.hpp"
#include "oracles.hpp"

using namespace ctia_ipc;

TEST(MatchTime, ZeroWeightIsImmediate) {
    for (int window = 0; window < 4; ++window) {
        EXPECT_EQ(match_time({1e-6, window}, WeightWord(0)), 0.0);
    }
}

TEST(MatchTime, TickOracleValues) {
    // Frozen from oracle::first_window_match.
    EXPECT_EQ(oracle::first_window_match(0, 15), 15);
    EXPECT_EQ(oracle::first_window_match(3, 5), 40);
    EXPECT_EQ(oracle::first_window_match(1, 8), 16);

    EXPECT_DOUBLE_EQ(match_time({1e-6, 0}, WeightWord(15)), 15e-6);
    EXPECT_DOUBLE_EQ(match_time({1e-6, 3}, WeightWord(5)), 40e-6);
}

TEST(MatchTime, ClosedFormEqualsBruteForceCounter) {
    for (int window = 0; window < 4; ++window) {
        const CounterConfig cfg{1e-6, window};
        for (int w = 0; w < 16; ++w) {
            EXPECT_EQ(match_ticks(cfg, WeightWord(w)), oracle::first_window_match(window, w))
                << "window " << window << " weight " << w;
        }
    }
}

TEST(MatchTime, MonotoneAndWindowDoubling) {
    for (int window = 0; window < 4; ++window) {
        const CounterConfig cfg{0.5e-6, window};
        for (int w = 1; w < 16; ++w) {
            EXPECT_LT(match_ticks(cfg, WeightWord(w - 1)), match_ticks(cfg, WeightWord(w)));
            if (window > 0) {
                EXPECT_EQ(match_ticks(cfg, WeightWord(w)), 2 * match_ticks({0.5e-6, window - 1}, WeightWord(w)));
            }
        }
    }
}

TEST(Pulse, WidthAndResetDominance) {
    const CounterConfig cfg{0.5e-6, 1};
    EXPECT_DOUBLE_EQ(pulse(cfg, WeightWord(8), false).width(), 8e-6);
    EXPECT_EQ(pulse(cfg, WeightWord(8), true).width(), 0.0);
    for (int a = 0; a < 15; ++a) {
        EXPECT_LT(pulse(cfg, WeightWord(a), false).width(), pulse(cfg, WeightWord(a + 1), false).width());
    }
}

TEST(CounterConfig, Validation) {
    EXPECT_THROW((CounterConfig{1e-6, 4}.validate()), InvalidParameter);
    EXPECT_THROW((CounterConfig{0.0, 0}.validate()), InvalidParameter);
    EXPECT_NO_THROW((CounterConfig{1e-6, 3}.validate()));
    EXPECT_THROW(WeightWord(16), InvalidParameter);
    EXPECT_THROW(WeightWord(-1), InvalidParameter);
}

TEST(WeightStore, RoundTripAndIsolation) {
    WeightStore store(4, 4);
    store.write(0, 0, WeightWord(7));
    store.write(0, 1, WeightWord(3));
    EXPECT_EQ(store.read(0, 0).magnitude(), 7);
    EXPECT_EQ(store.read(0, 1).magnitude(), 3);
    EXPECT_THROW(store.write(4, 0, WeightWord(1)), IndexError);
    EXPECT_THROW((void)store.read(0, 4), IndexError);
}

TEST(WeightStore, FullArrayScan) {
    WeightStore store(1024, 1280);
    auto pattern = [](std::size_t r, std::size_t c) { return static_cast<int>((r * 7 + c * 13) % 16); };
    for (std::size_t r = 0; r < store.rows(); ++r) {
        for (std::size_t c = 0; c < store.cols(); ++c) {
            store.write(r, c, WeightWord(pattern(r, c)));
        }
    }
    std::size_t mismatches = 0;
    for (std::size_t r = 0; r < store.rows(); ++r) {
        for (std::size_t c = 0; c < store.cols(); ++c) {
            mismatches += store.read(r, c).magnitude() != pattern(r, c) ? 1 : 0;
        }
    }
    EXPECT_EQ(mismatches, 0U);
}
