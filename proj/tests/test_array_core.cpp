#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ctia_ipc/array_core.hpp"
#include "oracles.hpp"

using namespace ctia_ipc;

namespace {

BayerFrame uniform_frame(std::size_t rows, std::size_t cols, std::uint16_t code) {
    return BayerFrame(rows, cols, 50e-12, std::vector<std::uint16_t>(rows * cols, code));
}

void fill_plane(WeightStore& plane, int magnitude) {
    for (std::size_t r = 0; r < plane.rows(); ++r) {
        for (std::size_t c = 0; c < plane.cols(); ++c) {
            plane.write(r, c, WeightWord(magnitude));
        }
    }
}

} // namespace

TEST(AccumulateColumn, SumsContributions) {
    const std::vector<double> v{0.01, 0.02, 0.03};
    EXPECT_NEAR(accumulate_column(v), 0.06, 1e-15);
    EXPECT_EQ(accumulate_column({}), 0.0);
    const std::vector<double> bad{0.01, -0.02};
    EXPECT_THROW((void)accumulate_column(bad), InvalidState);
}

TEST(CombineColumns, DividerMatchesCapacitorOracle) {
    ArrayConfig cfg;
    EXPECT_DOUBLE_EQ(cfg.divider(), 7.0);
    const std::vector<double> cols{0.1, 0.2, 0.3, 0.05};
    EXPECT_NEAR(combine_columns(cfg, cols), oracle::adc_input(cols, cfg.c1, cfg.c2, cfg.c_f_acc), 1e-15);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> cap(1e-15, 50e-15);
    std::uniform_real_distribution<double> volt(0.0, 0.8);
    for (int i = 0; i < 200; ++i) {
        cfg.c1 = cap(rng);
        cfg.c2 = cap(rng);
        cfg.c_f_acc = cap(rng);
        std::vector<double> v(1 + i % 20);
        for (auto& x : v) {
            x = volt(rng);
        }
        const double expect = oracle::adc_input(v, cfg.c1, cfg.c2, cfg.c_f_acc);
        EXPECT_NEAR(combine_columns(cfg, v), expect, 1e-12 * expect);
    }
    EXPECT_THROW((void)combine_columns(cfg, {}), InvalidConfiguration);
}

TEST(CombineColumns, AdditiveOverPartitions) {
    const ArrayConfig cfg;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> volt(0.0, 0.5);
    for (int i = 0; i < 100; ++i) {
        std::vector<double> v(14);
        for (auto& x : v) {
            x = volt(rng);
        }
        const std::size_t cut = 1 + static_cast<std::size_t>(i) % 13;
        const std::vector<double> a(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(cut));
        const std::vector<double> b(v.begin() + static_cast<std::ptrdiff_t>(cut), v.end());
        EXPECT_NEAR(combine_columns(cfg, v), combine_columns(cfg, a) + combine_columns(cfg, b), 1e-14);
    }
}

TEST(MacCycle, FullScaleUniformWindow) {
    // 3x3 quads of full-scale input, weight 15, window 0.
    const ArrayConfig cfg;
    const PixelParams px;
    const CounterConfig wtc;
    const auto frame = uniform_frame(6, 6, 65535);
    WeightStore plane(6, 6);
    fill_plane(plane, 15);
    const std::vector<PixelWindow> windows{{0, 0, 6, 6}};
    const auto out = run_mac_cycle(cfg, px, frame, plane, wtc, windows, Polarity::Positive);
    const double per_pixel = 50e-12 * 15e-6 / 10e-15; // 75 mV
    EXPECT_NEAR(out.v_cbl[0], 6 * per_pixel, 1e-12);
    EXPECT_NEAR(out.v_adc_in[0], 36 * per_pixel / 7.0, 1e-12);
}

TEST(MacCycle, ZeroWeightOrInputGivesZero) {
    const ArrayConfig cfg;
    const PixelParams px;
    const CounterConfig wtc;
    WeightStore plane(4, 4);
    const std::vector<PixelWindow> windows{{0, 0, 4, 4}};
    EXPECT_EQ(run_mac_cycle(cfg, px, uniform_frame(4, 4, 65535), plane, wtc, windows, Polarity::Positive).v_adc_in[0], 0.0);
    fill_plane(plane, 15);
    EXPECT_EQ(run_mac_cycle(cfg, px, uniform_frame(4, 4, 0), plane, wtc, windows, Polarity::Positive).v_adc_in[0], 0.0);
}

TEST(MacCycle, MatchesPerPixelOracle) {
    const ArrayConfig cfg;
    const PixelParams px;
    const CounterConfig wtc{1e-6, 1};
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> code(0, 65535);
    std::uniform_int_distribution<int> mag(0, 15);
    BayerFrame frame(12, 20, 50e-12);
    WeightStore plane(12, 20);
    for (std::size_t r = 0; r < 12; ++r) {
        for (std::size_t c = 0; c < 20; ++c) {
            frame.set_code(r, c, static_cast<std::uint16_t>(code(rng)));
            plane.write(r, c, WeightWord(mag(rng)));
        }
    }
    const std::vector<PixelWindow> windows{{0, 0, 6, 6}, {2, 8, 6, 6}, {-2, 14, 6, 6}};
    const auto out = run_mac_cycle(cfg, px, frame, plane, wtc, windows, Polarity::Positive);
    for (std::size_t i = 0; i < windows.size(); ++i) {
        std::vector<double> cols;
        for (std::size_t dc = 0; dc < windows[i].width; ++dc) {
            long double col = 0.0L;
            for (std::size_t dr = 0; dr < windows[i].height; ++dr) {
                const auto r = windows[i].row0 + static_cast<std::ptrdiff_t>(dr);
                const auto c = windows[i].col0 + static_cast<std::ptrdiff_t>(dc);
                if (r < 0 || r >= 12 || c < 0 || c >= 20) {
                    continue;
                }
                const auto ur = static_cast<std::size_t>(r);
                const auto uc = static_cast<std::size_t>(c);
                col += static_cast<long double>(frame.code(ur, uc)) / 65535.0L * 50e-12L *
                       (plane.read(ur, uc).magnitude() * 2 * 1e-6L) / 10e-15L;
            }
            cols.push_back(static_cast<double>(col));
        }
        const double expect = oracle::adc_input(cols, cfg.c1, cfg.c2, cfg.c_f_acc);
        EXPECT_NEAR(out.v_adc_in[i], expect, 1e-12 * std::max(expect, 1e-3));
    }
}

TEST(MacCycle, HomogeneousInInput) {
    const ArrayConfig cfg;
    const PixelParams px;
    const CounterConfig wtc;
    WeightStore plane(4, 4);
    fill_plane(plane, 9);
    const std::vector<PixelWindow> windows{{0, 0, 4, 4}};
    const double half = run_mac_cycle(cfg, px, uniform_frame(4, 4, 20000), plane, wtc, windows, Polarity::Positive).v_adc_in[0];
    const double full = run_mac_cycle(cfg, px, uniform_frame(4, 4, 40000), plane, wtc, windows, Polarity::Positive).v_adc_in[0];
    EXPECT_NEAR(full, 2.0 * half, 1e-14);
}

TEST(MacCycle, SignedPlanesStaySeparate) {
    const ArrayConfig cfg;
    const PixelParams px;
    const CounterConfig wtc;
    const auto frame = uniform_frame(4, 4, 65535);
    WeightStore pos(4, 4);
    WeightStore neg(4, 4);
    pos.write(0, 0, WeightWord(15));
    neg.write(1, 1, WeightWord(5));
    const std::vector<PixelWindow> windows{{0, 0, 4, 4}};
    const auto out = run_signed_mac(cfg, px, frame, pos, neg, wtc, windows);
    EXPECT_NEAR(out[0].v_pos, 0.075 / 7.0, 1e-15);
    EXPECT_NEAR(out[0].v_neg, 0.025 / 7.0, 1e-15);
}

TEST(MacCycle, RejectsSharedColumnsAndBadShapes) {
    const ArrayConfig cfg;
    const PixelParams px;
    const CounterConfig wtc;
    const auto frame = uniform_frame(8, 8, 100);
    WeightStore plane(8, 8);
    const std::vector<PixelWindow> overlap{{0, 0, 4, 4}, {0, 2, 4, 4}};
    EXPECT_THROW((void)run_mac_cycle(cfg, px, frame, plane, wtc, overlap, Polarity::Positive), ScheduleError);
    const std::vector<PixelWindow> stacked{{0, 0, 4, 4}, {4, 4, 4, 4}};
    EXPECT_NO_THROW((void)run_mac_cycle(cfg, px, frame, plane, wtc, stacked, Polarity::Positive));

    WeightStore small(4, 4);
    EXPECT_THROW((void)run_mac_cycle(cfg, px, frame, small, wtc, stacked, Polarity::Positive), ScheduleError);

    ArrayConfig tiny = cfg;
    tiny.rows = 4;
    EXPECT_THROW((void)run_mac_cycle(tiny, px, frame, plane, wtc, stacked, Polarity::Positive), ScheduleError);

    ArrayConfig readout = cfg;
    readout.mode = ArrayMode::Readout;
    EXPECT_THROW((void)run_mac_cycle(readout, px, frame, plane, wtc, stacked, Polarity::Positive),
                 InvalidConfiguration);
}

TEST(Readout, PerPixelVoltages) {
    ArrayConfig cfg;
    cfg.mode = ArrayMode::Readout;
    const PixelParams px;
    BayerFrame frame(2, 2, 50e-12, {0, 65535, 32768, 65535});
    const auto v = readout_frame(cfg, px, frame, 10e-6);
    ASSERT_EQ(v.size(), 4U);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_NEAR(v[1], 0.05, 1e-15);
    EXPECT_NEAR(v[2], 0.05 * 32768.0 / 65535.0, 1e-15);
    // Long exposures clamp at the headroom.
    EXPECT_DOUBLE_EQ(readout_frame(cfg, px, frame, 1.0)[1], px.headroom);

    cfg.mode = ArrayMode::Mac;
    EXPECT_THROW((void)readout_frame(cfg, px, frame, 1e-6), InvalidConfiguration);
}

TEST(BayerFrame, ChannelLayout) {
    EXPECT_EQ(bayer_channel_at(0, 0), BayerChannel::R);
    EXPECT_EQ(bayer_channel_at(0, 1), BayerChannel::G1);
    EXPECT_EQ(bayer_channel_at(1, 0), BayerChannel::G2);
    EXPECT_EQ(bayer_channel_at(3, 5), BayerChannel::B);
    EXPECT_THROW(BayerFrame(2, 2, 50e-12, {1, 2, 3}), DimensionError);
    EXPECT_THROW(BayerFrame(0, 2, 50e-12), DimensionError);
}
