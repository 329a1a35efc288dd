#include <gtest/gtest.h>

#include "ctia_ipc/sweep.hpp"

using namespace ctia_ipc;

TEST(Sweep, ModeNames) {
    for (auto m : {SweepMode::VsWeight, SweepMode::VsCurrent, SweepMode::VsProduct, SweepMode::MultiWindow}) {
        EXPECT_EQ(parse_sweep_mode(to_string(m)), m);
    }
    EXPECT_FALSE(parse_sweep_mode("vs_time").has_value());
}

TEST(Sweep, VsWeightIsLinearAndMonotone) {
    const ChipConfig chip;
    const auto rows = linearity_sweep(chip, SweepMode::VsWeight);
    ASSERT_EQ(rows.size(), 16U);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_GT(rows[i].v_adc_in, rows[i - 1].v_adc_in);
        EXPECT_GE(rows[i].code, rows[i - 1].code);
    }
    EXPECT_EQ(rows.front().v_adc_in, 0.0);
    EXPECT_NEAR(rows.back().v_adc_in, 0.075 / 7.0, 1e-15);
}

TEST(Sweep, ProductFitIsLinear) {
    const ChipConfig chip;
    const auto rows = linearity_sweep(chip, SweepMode::VsProduct);
    EXPECT_EQ(rows.size(), 16U * 11U);
    const auto fit = sweep_fit(rows, SweepMode::VsProduct, 1);
    EXPECT_GE(fit.r_squared, 0.999);
    EXPECT_NEAR(fit.slope, chip.calibration().volts_per_unit_product, 1e-12);
}

TEST(Sweep, MultiWindowLinearForEachKernel) {
    ChipConfig chip;
    for (int window = 0; window < 4; ++window) {
        chip.wtc.window = window;
        const auto rows = linearity_sweep(chip, SweepMode::MultiWindow);
        for (std::size_t k : {3, 5, 7}) {
            const auto fit = sweep_fit(rows, SweepMode::MultiWindow, k);
            EXPECT_GE(fit.r_squared, 0.999) << "k=" << k << " window=" << window;
            EXPECT_NEAR(fit.slope, 4.0 * k * k * chip.calibration().volts_per_unit_product,
                        1e-9 * fit.slope);
        }
    }
}

TEST(Sweep, RejectsTinyGrid) {
    const ChipConfig chip;
    SweepConfig cfg;
    cfg.x_points = 1;
    EXPECT_THROW((void)linearity_sweep(chip, SweepMode::VsCurrent, cfg), InvalidParameter);
}
