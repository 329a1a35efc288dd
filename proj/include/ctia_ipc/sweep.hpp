#pragma once

// Linearity sweeps of the analog MAC through the full chain: weight levels
// and photocurrent grid in, CBL voltage, ADC-input voltage and code out.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ctia_ipc/adc.hpp"
#include "ctia_ipc/array_core.hpp"
#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/error.hpp"
#include "ctia_ipc/simulator.hpp"
#include "ctia_ipc/wtc.hpp"

namespace ctia_ipc {

enum class SweepMode { VsWeight, VsCurrent, VsProduct, MultiWindow };

[[nodiscard]] inline std::string_view to_string(SweepMode m) noexcept {
    switch (m) {
    case SweepMode::VsWeight: return "vs_weight";
    case SweepMode::VsCurrent: return "vs_current";
    case SweepMode::VsProduct: return "vs_product";
    case SweepMode::MultiWindow: return "multiwindow";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<SweepMode> parse_sweep_mode(std::string_view s) noexcept {
    for (auto m : {SweepMode::VsWeight, SweepMode::VsCurrent, SweepMode::VsProduct, SweepMode::MultiWindow}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    return std::nullopt;
}

struct SweepConfig {
    std::size_t x_points = 11;
    std::vector<std::size_t> kernel_sizes{3, 5, 7};
};

struct SweepRow {
    SweepMode mode = SweepMode::VsWeight;
    std::size_t k = 1;
    double w_norm = 0.0;
    double x_norm = 0.0;
    double v_cbl = 0.0;
    double v_adc_in = 0.0;
    int code = 0;
};

namespace detail {

// k == 0 drives a single pixel (R of one quad); k >= 1 drives a full
// 2k x 2k window with every pixel at the same weight and input.
inline SweepRow sweep_point(const ChipConfig& chip, SweepMode mode, std::size_t k, int magnitude,
                            std::uint16_t code) {
    const std::size_t side = k == 0 ? 2 : 2 * k;
    BayerFrame frame(side, side, chip.pixel.i_max);
    WeightStore plane(side, side);
    for (std::size_t r = 0; r < side; ++r) {
        for (std::size_t c = 0; c < side; ++c) {
            if (k == 0 && (r != 0 || c != 0)) {
                continue;
            }
            frame.set_code(r, c, code);
            plane.write(r, c, WeightWord(magnitude));
        }
    }
    const PixelWindow window{0, 0, side, side};
    const auto v = run_mac_cycle(chip.array, chip.pixel, frame, plane, chip.wtc, std::span(&window, 1),
                                 Polarity::Positive);

    SweepRow row;
    row.mode = mode;
    row.k = k == 0 ? 1 : k;
    row.w_norm = static_cast<double>(magnitude) / WeightWord::max_magnitude;
    row.x_norm = static_cast<double>(code) / BayerFrame::full_code;
    row.v_cbl = v.v_cbl.front();
    row.v_adc_in = v.v_adc_in.front();
    row.code = quantize(chip.adc, row.v_adc_in);
    return row;
}

inline std::vector<std::uint16_t> x_grid(std::size_t points) {
    if (points < 2) {
        throw InvalidParameter("metrics-mc", "sweep needs at least two photocurrent points");
    }
    std::vector<std::uint16_t> codes;
    for (std::size_t j = 0; j < points; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(points - 1);
        codes.push_back(static_cast<std::uint16_t>(std::lround(x * BayerFrame::full_code)));
    }
    return codes;
}

} // namespace detail

[[nodiscard]] inline std::vector<SweepRow> linearity_sweep(const ChipConfig& chip, SweepMode mode,
                                                           const SweepConfig& cfg = {}) {
    chip.validate();
    const auto grid = detail::x_grid(cfg.x_points);
    std::vector<SweepRow> rows;
    switch (mode) {
    case SweepMode::VsWeight:
        for (int m = 0; m <= WeightWord::max_magnitude; ++m) {
            rows.push_back(detail::sweep_point(chip, mode, 0, m, grid.back()));
        }
        break;
    case SweepMode::VsCurrent:
        for (auto x : grid) {
            rows.push_back(detail::sweep_point(chip, mode, 0, WeightWord::max_magnitude, x));
        }
        break;
    case SweepMode::VsProduct:
        for (int m = 0; m <= WeightWord::max_magnitude; ++m) {
            for (auto x : grid) {
                rows.push_back(detail::sweep_point(chip, mode, 0, m, x));
            }
        }
        break;
    case SweepMode::MultiWindow:
        for (auto k : cfg.kernel_sizes) {
            if (k < 1) {
                throw InvalidParameter("metrics-mc", "multiwindow kernel sizes must be >= 1");
            }
            for (int m = 0; m <= WeightWord::max_magnitude; ++m) {
                for (auto x : grid) {
                    rows.push_back(detail::sweep_point(chip, mode, k, m, x));
                }
            }
        }
        break;
    }
    return rows;
}

/// Least-squares fit of ADC-input voltage against w_norm * x_norm for the
/// rows of one (mode, k) group.
[[nodiscard]] inline FitResult sweep_fit(std::span<const SweepRow> rows, SweepMode mode, std::size_t k) {
    std::vector<TransferSample> samples;
    for (const auto& r : rows) {
        if (r.mode == mode && r.k == k) {
            samples.push_back({r.w_norm, r.x_norm, r.v_adc_in});
        }
    }
    return fit_transfer(samples);
}

} // namespace ctia_ipc
