#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ctia_ipc/golden.hpp"
#include "ctia_ipc/simulator.hpp"
#include "ctia_ipc/synthetic.hpp"
#include "oracles.hpp"

using namespace ctia_ipc;

namespace {

FusedLayer layer_for(const ConvSpec& spec, std::uint64_t seed) {
    const auto l = random_layer(spec, seed);
    return make_fused_layer(l.weights, l.bn, spec);
}

} // namespace

TEST(Calibration, DefaultValues) {
    const ChipConfig chip;
    const auto cal = chip.calibration();
    EXPECT_NEAR(cal.volts_per_unit_product, 50e-12 * 15e-6 / 10e-15 / 7.0, 1e-15);
    EXPECT_DOUBLE_EQ(cal.lsb, 0.01);
    EXPECT_NEAR(cal.lsb_per_unit, 0.075 / 7.0 / 0.01, 1e-12);
}

TEST(BnOffsetCodes, ScalesWithOffset) {
    const ChipConfig chip;
    const auto cal = chip.calibration();
    // B of 15 * weight_scale maps to one full-scale pixel product.
    EXPECT_EQ(bn_offset_codes(1.5, 0.1, cal), 1);
    EXPECT_EQ(bn_offset_codes(-15.0, 0.1, cal), -11);
    EXPECT_EQ(bn_offset_codes(3.0, 0.0, cal), 0);
}

TEST(GoldenLayer, ZeroFrameGivesBiasOnly) {
    ConvSpec spec;
    spec.c_o = 4;
    const auto fused = layer_for(spec, 3);
    const ChipConfig chip;
    const auto cal = chip.calibration();
    const BayerFrame frame(32, 32, 50e-12);
    const auto g = golden_layer(frame, fused, spec, chip.adc, cal);
    for (std::size_t o = 0; o < spec.c_o; ++o) {
        const int bias = bn_offset_codes(fused.offsets[o], fused.quantized.weight_scale, cal);
        for (int code : g.signed_codes[o]) {
            EXPECT_EQ(code, bias);
        }
    }
}

TEST(GoldenLayer, UnitKernelFullScale) {
    // k = 1: one quad per output. Only the R tap is 15, others 0.
    ConvSpec spec;
    spec.k = 1;
    spec.s = 1;
    spec.c_o = 1;
    spec.p_s = 1;
    WeightTensor w(1, 4, 1);
    w.values = {1.0, 0.0, 0.0, 0.0};
    const auto fused = make_fused_layer(w, BnParams::identity(1, 1e-12), spec);
    const ChipConfig chip;
    BayerFrame frame(2, 2, 50e-12, {65535, 65535, 65535, 65535});
    const auto g = golden_layer(frame, fused, spec, chip.adc, chip.calibration());
    // 75 mV / 7 = 10.71 mV -> 1 code
    EXPECT_EQ(g.signed_codes[0][0], 1);
    const auto sim = simulate_layer(frame, fused, spec, chip, 1);
    EXPECT_EQ(sim.signed_codes[0][0], 1);
}

TEST(GoldenLayer, WithinOneOfFloatingPointModel) {
    ConvSpec spec;
    spec.c_o = 4;
    const ChipConfig chip;
    const auto cal = chip.calibration();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        auto frame = random_frame(32, 32, 50e-12, seed);
        for (std::size_t r = 0; r < 32; ++r) {
            for (std::size_t c = 0; c < 32; ++c) {
                frame.set_code(r, c, static_cast<std::uint16_t>(frame.code(r, c) / 2));
            }
        }
        const auto fused = layer_for(spec, seed + 77);
        const auto g = golden_layer(frame, fused, spec, chip.adc, cal);
        const auto f = oracle::float_layer(frame, fused, spec, cal.volts_per_unit_product, cal.lsb);
        const auto report = compare_runs(g.pooled, f);
        EXPECT_LE(report.max_abs_delta, 1) << "seed " << seed;
    }
}

TEST(GoldenLayer, RejectsOddFramesAndShapeMismatch) {
    ConvSpec spec;
    spec.c_o = 2;
    const auto fused = layer_for(spec, 1);
    const ChipConfig chip;
    EXPECT_THROW((void)golden_layer(BayerFrame(31, 32, 50e-12), fused, spec, chip.adc, chip.calibration()),
                 DimensionError);
    ConvSpec other = spec;
    other.c_o = 3;
    EXPECT_THROW((void)golden_layer(BayerFrame(32, 32, 50e-12), fused, other, chip.adc, chip.calibration()),
                 DimensionError);
}

TEST(Simulator, MatchesGoldenAcrossSeeds) {
    ConvSpec spec;
    const ChipConfig chip;
    const auto cal = chip.calibration();
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto frame = random_frame(64, 64, chip.pixel.i_max, seed);
        const auto fused = layer_for(spec, seed);
        const auto sim = simulate_layer(frame, fused, spec, chip);
        const auto gold = golden_layer(frame, fused, spec, chip.adc, cal);
        const auto report = compare_runs(sim.pooled, gold.pooled);
        EXPECT_TRUE(report.passed) << "seed " << seed << " max delta " << report.max_abs_delta;
        for (std::size_t o = 0; o < spec.c_o; ++o) {
            for (std::size_t i = 0; i < sim.signed_codes[o].size(); ++i) {
                // Per-polarity floors can each move by one code.
                EXPECT_LE(std::abs(sim.signed_codes[o][i] - gold.signed_codes[o][i]), 2);
            }
        }
    }
}

TEST(Simulator, PaddedAndStridedLayers) {
    const ChipConfig chip;
    const auto cal = chip.calibration();
    for (std::size_t k : {1, 3, 5}) {
        for (std::size_t s : {1, 2, 3}) {
            ConvSpec spec;
            spec.k = k;
            spec.s = s;
            spec.p = k / 2;
            spec.c_o = 2;
            const auto frame = random_frame(20, 24, chip.pixel.i_max, k * 10 + s);
            const auto fused = layer_for(spec, k + s);
            const auto sim = simulate_layer(frame, fused, spec, chip, 2);
            const auto gold = golden_layer(frame, fused, spec, chip.adc, cal);
            EXPECT_TRUE(compare_runs(sim.pooled, gold.pooled).passed) << "k=" << k << " s=" << s;
        }
    }
}

TEST(Simulator, ThreadCountInvariant) {
    ConvSpec spec;
    const ChipConfig chip;
    const auto frame = random_frame(64, 64, chip.pixel.i_max, 5);
    const auto fused = layer_for(spec, 5);
    const auto one = simulate_layer(frame, fused, spec, chip, 1);
    const auto many = simulate_layer(frame, fused, spec, chip, 4);
    EXPECT_EQ(one.signed_codes, many.signed_codes);
    EXPECT_EQ(one.pooled, many.pooled);
}

TEST(Golden, PoolingCommutesWithRequantize) {
    // relu_requantize is monotone, so requantize-then-pool equals
    // pool-over-codes-then-requantize.
    ConvSpec spec;
    spec.c_o = 3;
    const ChipConfig chip;
    const auto cal = chip.calibration();
    const auto frame = random_frame(48, 40, chip.pixel.i_max, 9);
    const auto fused = layer_for(spec, 9);
    const auto g = golden_layer(frame, fused, spec, chip.adc, cal);
    for (std::size_t o = 0; o < spec.c_o; ++o) {
        const auto& m = g.conv[o];
        const AdcConfig adc = detail::channel_adc(chip.adc, fused, cal, o);
        for (std::size_t r = 0; r < g.pooled[o].rows; ++r) {
            for (std::size_t c = 0; c < g.pooled[o].cols; ++c) {
                int best = -1000;
                for (std::size_t dr = 0; dr < 2; ++dr) {
                    for (std::size_t dc = 0; dc < 2; ++dc) {
                        const auto rr = 2 * r + dr;
                        const auto cc = 2 * c + dc;
                        if (rr < m.rows && cc < m.cols) {
                            best = std::max(best, g.signed_codes[o][rr * m.cols + cc]);
                        }
                    }
                }
                EXPECT_EQ(g.pooled[o].at(r, c), relu_requantize(adc, best));
            }
        }
    }
}

TEST(CompareRuns, CountsDeltas) {
    ActivationMap a(1, 4);
    ActivationMap b(1, 4);
    a.values = {1, 2, 3, 4};
    b.values = {1, 3, 3, 6};
    const auto r = compare_runs(a, b);
    EXPECT_EQ(r.max_abs_delta, 2);
    EXPECT_DOUBLE_EQ(r.fraction_exact, 0.5);
    EXPECT_DOUBLE_EQ(r.fraction_within_one, 0.75);
    EXPECT_FALSE(r.passed);
    EXPECT_THROW((void)compare_runs(a, ActivationMap(2, 2)), DimensionError);
}
