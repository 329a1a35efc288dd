#pragma once

// Full analog-chain simulation of the first layer: for every output channel
// the schedule's cycles are executed as write phase, positive-weight compute,
// negative-weight compute, then CDS conversion, ReLU/requantize and pooling.

#include <cstddef>
#include <vector>

#include "ctia_ipc/adc.hpp"
#include "ctia_ipc/array_core.hpp"
#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/golden.hpp"
#include "ctia_ipc/layer_mapper.hpp"
#include "ctia_ipc/parallel.hpp"
#include "ctia_ipc/wtc.hpp"

namespace ctia_ipc {

struct ChipConfig {
    PixelParams pixel;
    ArrayConfig array;
    CounterConfig wtc;
    AdcConfig adc;

    void validate() const {
        pixel.validate();
        array.validate();
        wtc.validate();
        adc.validate();
    }

    [[nodiscard]] CalibrationMap calibration() const { return make_calibration(pixel, array, wtc, adc); }
};

/// Physical receptive field of an output node: k x k Bayer quads.
[[nodiscard]] inline PixelWindow window_for(const ConvSpec& spec, OutputNode node) {
    const auto site_row = static_cast<std::ptrdiff_t>(node.row * spec.s) - static_cast<std::ptrdiff_t>(spec.p);
    const auto site_col = static_cast<std::ptrdiff_t>(node.col * spec.s) - static_cast<std::ptrdiff_t>(spec.p);
    return {2 * site_row, 2 * site_col, 2 * spec.k, 2 * spec.k};
}

/// Write phase for one cycle: tile channel `o`'s kernel magnitudes into both
/// cycle planes at every scheduled window. Padding taps have no pixel.
inline void write_cycle_weights(const QuantizedWeights& q, const ConvSpec& spec, std::size_t o,
                                const ScheduleCycle& cycle, WeightStore& positive, WeightStore& negative) {
    const auto rows = static_cast<std::ptrdiff_t>(positive.rows());
    const auto cols = static_cast<std::ptrdiff_t>(positive.cols());
    for (const auto& node : cycle.windows) {
        const auto w = window_for(spec, node);
        for (std::size_t ci = 0; ci < spec.c_in; ++ci) {
            const auto [dy, dx] = bayer_offset(static_cast<int>(ci));
            for (std::size_t ky = 0; ky < spec.k; ++ky) {
                const auto r = w.row0 + static_cast<std::ptrdiff_t>(2 * ky) + dy;
                if (r < 0 || r >= rows) {
                    continue;
                }
                for (std::size_t kx = 0; kx < spec.k; ++kx) {
                    const auto c = w.col0 + static_cast<std::ptrdiff_t>(2 * kx) + dx;
                    if (c < 0 || c >= cols) {
                        continue;
                    }
                    const auto i = q.index(o, ci, ky, kx);
                    const auto ur = static_cast<std::size_t>(r);
                    const auto uc = static_cast<std::size_t>(c);
                    positive.write(ur, uc, WeightWord(q.positive[i]));
                    negative.write(ur, uc, WeightWord(q.negative[i]));
                }
            }
        }
    }
}

/// Channels run concurrently; each owns its weight planes and output slot,
/// so the result is identical for any worker count.
[[nodiscard]] inline LayerResult simulate_layer(const BayerFrame& frame, const FusedLayer& fused,
                                                const ConvSpec& spec, const ChipConfig& chip,
                                                std::size_t threads = 0) {
    chip.validate();
    detail::check_layer_inputs(frame, fused, spec);
    const auto schedule = build_schedule(spec, {frame.site_rows(), frame.site_cols()});
    const auto cal = chip.calibration();
    const Dims conv = schedule.conv;

    LayerResult result;
    result.conv.resize(spec.c_o);
    result.pooled.resize(spec.c_o);
    result.signed_codes.resize(spec.c_o);

    parallel_for(spec.c_o, resolve_threads(threads), [&](std::size_t o) {
        const AdcConfig adc = detail::channel_adc(chip.adc, fused, cal, o);
        WeightStore positive(frame.rows(), frame.cols());
        WeightStore negative(frame.rows(), frame.cols());
        ActivationMap map(conv.rows, conv.cols);
        std::vector<int> signed_codes(conv.elements());
        std::vector<PixelWindow> windows;

        for (const auto& cycle : schedule.cycles) {
            write_cycle_weights(fused.quantized, spec, o, cycle, positive, negative);
            windows.clear();
            for (const auto& node : cycle.windows) {
                windows.push_back(window_for(spec, node));
            }
            const auto volts =
                run_signed_mac(chip.array, chip.pixel, frame, positive, negative, chip.wtc, windows);
            for (std::size_t i = 0; i < cycle.windows.size(); ++i) {
                const auto& node = cycle.windows[i];
                const int code = cds_signed(adc, volts[i].v_pos, volts[i].v_neg);
                signed_codes[node.row * conv.cols + node.col] = code;
                map.at(node.row, node.col) = relu_requantize(adc, code);
            }
        }
        result.pooled[o] = maxpool(map, spec.p_s);
        result.conv[o] = std::move(map);
        result.signed_codes[o] = std::move(signed_codes);
    });
    return result;
}

} // namespace ctia_ipc
