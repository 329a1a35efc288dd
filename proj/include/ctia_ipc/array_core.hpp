#pragma once

// Pixel array in MAC mode: per-column charge-bitline accumulation, the
// switching matrix that charge-shares a window's columns onto the ADC input,
// and the positive/negative weight cycles. Readout mode is a plain voltage map.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/error.hpp"
#include "ctia_ipc/wtc.hpp"

namespace ctia_ipc {

enum class ArrayMode { Readout, Mac };

enum class Polarity { Positive, Negative };

struct ArrayConfig {
    std::size_t rows = 1024;
    std::size_t cols = 1280;
    double c1 = 10e-15;
    double c2 = 10e-15;
    double c_f_acc = 10e-15;
    ArrayMode mode = ArrayMode::Mac;

    // Charge-sharing divider between the summed column voltages and the ADC input.
    [[nodiscard]] double divider() const noexcept { return 4.0 + 2.0 * c2 / c1 + c_f_acc / c1; }

    void validate() const {
        if (rows == 0 || cols == 0) {
            throw InvalidConfiguration("array-core", "array must have at least one row and column");
        }
        for (double c : {c1, c2, c_f_acc}) {
            if (!std::isfinite(c) || c <= 0.0) {
                throw InvalidConfiguration("array-core", "accumulation capacitances must be finite and > 0");
            }
        }
    }
};

/// Charge-shared sum of one column's pixel contributions on its CBL.
[[nodiscard]] inline double accumulate_column(std::span<const double> contributions) {
    double sum = 0.0;
    for (double v : contributions) {
        if (!(v >= 0.0)) {
            throw InvalidState("array-core", "negative contribution on a charge bitline");
        }
        sum += v;
    }
    return sum;
}

/// Switching-matrix combination of N column voltages into the ADC input.
[[nodiscard]] inline double combine_columns(const ArrayConfig& cfg, std::span<const double> column_voltages) {
    if (column_voltages.empty()) {
        throw InvalidConfiguration("array-core", "switching matrix selected no columns");
    }
    double sum = 0.0;
    for (double v : column_voltages) {
        sum += v;
    }
    return sum / cfg.divider();
}

// Receptive field of one output node in physical pixel coordinates. The
// origin may be negative or the extent may run past the frame edge when the
// layer is padded; those positions carry zero photocurrent.
struct PixelWindow {
    std::ptrdiff_t row0 = 0;
    std::ptrdiff_t col0 = 0;
    std::size_t height = 0;
    std::size_t width = 0;
};

struct CycleVoltages {
    Polarity polarity = Polarity::Positive;
    std::vector<double> v_adc_in; // one per window, in window order
    std::vector<double> v_cbl;    // first selected column of each window
};

namespace detail {

inline void check_cycle_shape(const ArrayConfig& cfg, const BayerFrame& frame, const WeightStore& plane,
                              std::span<const PixelWindow> windows) {
    if (cfg.mode != ArrayMode::Mac) {
        throw InvalidConfiguration("array-core", "MAC cycle requested while the array is in readout mode");
    }
    if (frame.rows() > cfg.rows || frame.cols() > cfg.cols) {
        throw ScheduleError("array-core", "frame " + std::to_string(frame.rows()) + "x" +
                                              std::to_string(frame.cols()) + " exceeds the " +
                                              std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols) + " array");
    }
    if (plane.rows() != frame.rows() || plane.cols() != frame.cols()) {
        throw ScheduleError("array-core", "weight plane and frame dimensions differ");
    }

    std::vector<std::pair<std::ptrdiff_t, std::ptrdiff_t>> spans;
    spans.reserve(windows.size());
    for (const auto& w : windows) {
        if (w.height == 0 || w.width == 0) {
            throw ScheduleError("array-core", "empty window in MAC cycle");
        }
        spans.emplace_back(w.col0, w.col0 + static_cast<std::ptrdiff_t>(w.width));
    }
    std::sort(spans.begin(), spans.end());
    for (std::size_t i = 1; i < spans.size(); ++i) {
        if (spans[i].first < spans[i - 1].second) {
            throw ScheduleError("array-core", "windows in one cycle share a charge bitline column");
        }
    }
}

} // namespace detail

/// One compute phase: every pixel inside a scheduled window integrates for
/// its stored weight's exposure; columns accumulate in row order, then the
/// switching matrix combines the window's columns in column order.
[[nodiscard]] inline CycleVoltages run_mac_cycle(const ArrayConfig& cfg, const PixelParams& params,
                                                 const BayerFrame& frame, const WeightStore& plane,
                                                 const CounterConfig& wtc, std::span<const PixelWindow> windows,
                                                 Polarity polarity) {
    detail::check_cycle_shape(cfg, frame, plane, windows);

    std::array<double, WeightWord::max_magnitude + 1> exposure{};
    for (int m = 0; m <= WeightWord::max_magnitude; ++m) {
        exposure[static_cast<std::size_t>(m)] = match_time(wtc, WeightWord(m));
    }

    const auto frame_rows = static_cast<std::ptrdiff_t>(frame.rows());
    const auto frame_cols = static_cast<std::ptrdiff_t>(frame.cols());

    CycleVoltages out;
    out.polarity = polarity;
    out.v_adc_in.reserve(windows.size());
    out.v_cbl.reserve(windows.size());

    std::vector<double> contributions;
    std::vector<double> columns;
    for (const auto& w : windows) {
        columns.clear();
        for (std::size_t dc = 0; dc < w.width; ++dc) {
            const std::ptrdiff_t col = w.col0 + static_cast<std::ptrdiff_t>(dc);
            contributions.clear();
            if (col >= 0 && col < frame_cols) {
                for (std::size_t dr = 0; dr < w.height; ++dr) {
                    const std::ptrdiff_t row = w.row0 + static_cast<std::ptrdiff_t>(dr);
                    if (row < 0 || row >= frame_rows) {
                        continue;
                    }
                    const auto r = static_cast<std::size_t>(row);
                    const auto c = static_cast<std::size_t>(col);
                    const auto mag = plane.at(r, c).magnitude();
                    contributions.push_back(integrate(params, frame.photocurrent(r, c), exposure[mag]));
                }
            }
            columns.push_back(accumulate_column(contributions));
        }
        out.v_cbl.push_back(columns.front());
        out.v_adc_in.push_back(combine_columns(cfg, columns));
    }
    return out;
}

struct MacCycleResult {
    double v_pos = 0.0;
    double v_neg = 0.0;
};

/// Both polarity cycles for the same set of windows (double sampling).
[[nodiscard]] inline std::vector<MacCycleResult> run_signed_mac(const ArrayConfig& cfg, const PixelParams& params,
                                                                const BayerFrame& frame,
                                                                const WeightStore& positive_plane,
                                                                const WeightStore& negative_plane,
                                                                const CounterConfig& wtc,
                                                                std::span<const PixelWindow> windows) {
    const auto pos = run_mac_cycle(cfg, params, frame, positive_plane, wtc, windows, Polarity::Positive);
    const auto neg = run_mac_cycle(cfg, params, frame, negative_plane, wtc, windows, Polarity::Negative);
    std::vector<MacCycleResult> out(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
        out[i] = {pos.v_adc_in[i], neg.v_adc_in[i]};
    }
    return out;
}

/// Conventional imaging: every pixel integrates for the same exposure and is
/// read out individually (row-major volts).
[[nodiscard]] inline std::vector<double> readout_frame(const ArrayConfig& cfg, const PixelParams& params,
                                                       const BayerFrame& frame, double exposure) {
    if (cfg.mode != ArrayMode::Readout) {
        throw InvalidConfiguration("array-core", "readout requested while the array is in MAC mode");
    }
    if (frame.rows() > cfg.rows || frame.cols() > cfg.cols) {
        throw DimensionError("array-core", "frame exceeds the configured array");
    }
    std::vector<double> volts(frame.rows() * frame.cols());
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        for (std::size_t c = 0; c < frame.cols(); ++c) {
            volts[r * frame.cols() + c] = integrate(params, frame.photocurrent(r, c), exposure);
        }
    }
    return volts;
}

} // namespace ctia_ipc
