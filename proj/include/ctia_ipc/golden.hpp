#pragma once

// Integer reference model of the fused first layer and the comparison
// harness used to check the analog-chain simulator against it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "ctia_ipc/adc.hpp"
#include "ctia_ipc/array_core.hpp"
#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/error.hpp"
#include "ctia_ipc/layer_mapper.hpp"
#include "ctia_ipc/wtc.hpp"

namespace ctia_ipc {

/// Scale from one unit of normalized product (w_norm * x_norm, with
/// w_norm = magnitude / 15) to ADC-input volts and codes. Always derived from
/// the physical parameters so the oracle and the simulator cannot drift apart.
struct CalibrationMap {
    double volts_per_unit_product = 0.0;
    double lsb_per_unit = 0.0;
    double lsb = 0.0;
};

[[nodiscard]] inline CalibrationMap make_calibration(const PixelParams& pixel, const ArrayConfig& array,
                                                     const CounterConfig& wtc, const AdcConfig& adc) {
    const double full_exposure = static_cast<double>(wtc.max_exposure_ticks()) * wtc.t_step;
    CalibrationMap cal;
    cal.volts_per_unit_product = pixel.i_max * full_exposure / (pixel.c_f * array.divider());
    cal.lsb = adc.lsb();
    cal.lsb_per_unit = cal.volts_per_unit_product / cal.lsb;
    return cal;
}

/// Digitized batch-norm offset: B expressed in ADC-input volts, then rounded
/// to counter codes.
[[nodiscard]] inline int bn_offset_codes(double offset, double weight_scale, const CalibrationMap& cal) {
    if (weight_scale == 0.0) {
        return 0;
    }
    const double volts = offset * cal.volts_per_unit_product /
                         (static_cast<double>(WeightWord::max_magnitude) * weight_scale);
    return static_cast<int>(std::lround(volts / cal.lsb));
}

/// Per-channel activations before and after pooling, plus the signed CDS
/// code of every output node (before ReLU).
struct LayerResult {
    std::vector<ActivationMap> conv;
    std::vector<ActivationMap> pooled;
    std::vector<std::vector<int>> signed_codes;
};

namespace detail {

inline void check_layer_inputs(const BayerFrame& frame, const FusedLayer& fused, const ConvSpec& spec) {
    spec.validate();
    if (frame.rows() % 2 != 0 || frame.cols() % 2 != 0) {
        throw DimensionError("golden-oracle", "Bayer frame dimensions must be even (whole RGGB quads)");
    }
    const auto& q = fused.quantized;
    if (q.c_o != spec.c_o || q.c_in != spec.c_in || q.k != spec.k || fused.offsets.size() != spec.c_o) {
        throw DimensionError("golden-oracle", "fused layer shape does not match the convolution spec");
    }
}

inline AdcConfig channel_adc(const AdcConfig& adc, const FusedLayer& fused, const CalibrationMap& cal,
                             std::size_t channel) {
    AdcConfig out = adc;
    out.bn_offset_codes = bn_offset_codes(fused.offsets[channel], fused.quantized.weight_scale, cal);
    return out;
}

} // namespace detail

[[nodiscard]] inline LayerResult golden_layer(const BayerFrame& frame, const FusedLayer& fused,
                                              const ConvSpec& spec, const AdcConfig& adc,
                                              const CalibrationMap& cal) {
    detail::check_layer_inputs(frame, fused, spec);
    const Dims sites{frame.site_rows(), frame.site_cols()};
    const auto dims = output_dims(spec, sites);
    const auto& q = fused.quantized;
    const double codes_per_product =
        cal.lsb_per_unit / (static_cast<double>(WeightWord::max_magnitude) * BayerFrame::full_code);

    auto to_code = [&](std::int64_t acc) {
        const double c = std::floor(static_cast<double>(acc) * codes_per_product);
        return c >= adc.max_code() ? adc.max_code() : static_cast<int>(c);
    };

    LayerResult result;
    for (std::size_t o = 0; o < spec.c_o; ++o) {
        const AdcConfig ch_adc = detail::channel_adc(adc, fused, cal, o);
        ActivationMap map(dims.conv.rows, dims.conv.cols);
        std::vector<int> signed_codes(dims.conv.elements());
        for (std::size_t oy = 0; oy < dims.conv.rows; ++oy) {
            for (std::size_t ox = 0; ox < dims.conv.cols; ++ox) {
                std::int64_t acc_pos = 0;
                std::int64_t acc_neg = 0;
                for (std::size_t ci = 0; ci < spec.c_in; ++ci) {
                    const auto [dy, dx] = bayer_offset(static_cast<int>(ci));
                    for (std::size_t ky = 0; ky < spec.k; ++ky) {
                        const auto sy = static_cast<std::ptrdiff_t>(oy * spec.s + ky) -
                                        static_cast<std::ptrdiff_t>(spec.p);
                        if (sy < 0 || sy >= static_cast<std::ptrdiff_t>(sites.rows)) {
                            continue;
                        }
                        for (std::size_t kx = 0; kx < spec.k; ++kx) {
                            const auto sx = static_cast<std::ptrdiff_t>(ox * spec.s + kx) -
                                            static_cast<std::ptrdiff_t>(spec.p);
                            if (sx < 0 || sx >= static_cast<std::ptrdiff_t>(sites.cols)) {
                                continue;
                            }
                            const auto x = static_cast<std::int64_t>(
                                frame.code(static_cast<std::size_t>(2 * sy + dy), static_cast<std::size_t>(2 * sx + dx)));
                            const auto i = q.index(o, ci, ky, kx);
                            acc_pos += q.positive[i] * x;
                            acc_neg += q.negative[i] * x;
                        }
                    }
                }
                const int code = to_code(acc_pos) - to_code(acc_neg) + ch_adc.bn_offset_codes;
                signed_codes[oy * dims.conv.cols + ox] = code;
                map.at(oy, ox) = relu_requantize(ch_adc, code);
            }
        }
        result.pooled.push_back(maxpool(map, spec.p_s));
        result.conv.push_back(std::move(map));
        result.signed_codes.push_back(std::move(signed_codes));
    }
    return result;
}

struct ComparisonThresholds {
    int max_abs_delta = 1;
    double min_fraction_within_one = 1.0;
};

struct ComparisonReport {
    std::size_t elements = 0;
    int max_abs_delta = 0;
    double fraction_exact = 1.0;
    double fraction_within_one = 1.0;
    bool passed = true;
};

[[nodiscard]] inline ComparisonReport compare_runs(const ActivationMap& sim, const ActivationMap& gold,
                                                   const ComparisonThresholds& thresholds = {}) {
    if (sim.rows != gold.rows || sim.cols != gold.cols) {
        throw DimensionError("golden-oracle", "cannot compare " + std::to_string(sim.rows) + "x" +
                                                  std::to_string(sim.cols) + " against " +
                                                  std::to_string(gold.rows) + "x" + std::to_string(gold.cols));
    }
    ComparisonReport report;
    report.elements = sim.values.size();
    std::size_t exact = 0;
    std::size_t within = 0;
    for (std::size_t i = 0; i < sim.values.size(); ++i) {
        const int d = std::abs(static_cast<int>(sim.values[i]) - static_cast<int>(gold.values[i]));
        report.max_abs_delta = std::max(report.max_abs_delta, d);
        exact += d == 0 ? 1 : 0;
        within += d <= 1 ? 1 : 0;
    }
    if (report.elements > 0) {
        report.fraction_exact = static_cast<double>(exact) / static_cast<double>(report.elements);
        report.fraction_within_one = static_cast<double>(within) / static_cast<double>(report.elements);
    }
    report.passed = report.max_abs_delta <= thresholds.max_abs_delta &&
                    report.fraction_within_one >= thresholds.min_fraction_within_one;
    return report;
}

/// Aggregate over all channels of a layer (pooled outputs).
[[nodiscard]] inline ComparisonReport compare_runs(const std::vector<ActivationMap>& sim,
                                                   const std::vector<ActivationMap>& gold,
                                                   const ComparisonThresholds& thresholds = {}) {
    if (sim.size() != gold.size()) {
        throw DimensionError("golden-oracle", "channel count differs between runs");
    }
    ComparisonReport total;
    std::size_t exact = 0;
    std::size_t within = 0;
    for (std::size_t c = 0; c < sim.size(); ++c) {
        const auto r = compare_runs(sim[c], gold[c], thresholds);
        total.elements += r.elements;
        total.max_abs_delta = std::max(total.max_abs_delta, r.max_abs_delta);
        exact += static_cast<std::size_t>(std::llround(r.fraction_exact * static_cast<double>(r.elements)));
        within += static_cast<std::size_t>(std::llround(r.fraction_within_one * static_cast<double>(r.elements)));
    }
    if (total.elements > 0) {
        total.fraction_exact = static_cast<double>(exact) / static_cast<double>(total.elements);
        total.fraction_within_one = static_cast<double>(within) / static_cast<double>(total.elements);
    }
    total.passed = total.max_abs_delta <= thresholds.max_abs_delta &&
                   total.fraction_within_one >= thresholds.min_fraction_within_one;
    return total;
}

} // namespace ctia_ipc
