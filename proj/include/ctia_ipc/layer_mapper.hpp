#pragma once

// Maps a first-layer convolution onto the array: batch-norm fusion, signed
// 4-bit weight quantization split into positive/negative cycle planes, output
// geometry, and the column-disjoint window schedule.
//
// Spatial dimensions here are in sites of the 4-channel (RGGB) input, i.e.
// Bayer quads of the physical mosaic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/error.hpp"

namespace ctia_ipc {

struct ConvSpec {
    std::size_t k = 7;
    std::size_t s = 2;
    std::size_t p = 0;
    std::size_t c_o = 16;
    std::size_t c_in = bayer_channels;
    int n_b = 4;
    std::size_t p_s = 2;
    int weight_mag_bits = 4;

    void validate() const {
        if (k < 1 || s < 1 || c_o < 1 || p_s < 1) {
            throw InvalidConfiguration("layer-mapper", "k, s, c_o and p_s must be >= 1");
        }
        if (c_in != bayer_channels) {
            throw InvalidConfiguration("layer-mapper", "c_in is fixed at 4 (RGGB)");
        }
        if (n_b < 1) {
            throw InvalidConfiguration("layer-mapper", "n_b must be >= 1");
        }
        if (weight_mag_bits != 3 && weight_mag_bits != 4) {
            throw InvalidConfiguration("layer-mapper", "weight_mag_bits must be 3 or 4");
        }
    }

    [[nodiscard]] int max_magnitude() const noexcept { return (1 << weight_mag_bits) - 1; }
};

struct Dims {
    std::size_t rows = 0;
    std::size_t cols = 0;

    [[nodiscard]] std::size_t elements() const noexcept { return rows * cols; }
    friend bool operator==(const Dims&, const Dims&) = default;
};

struct LayerDims {
    Dims conv;
    Dims pooled;
};

[[nodiscard]] inline LayerDims output_dims(const ConvSpec& spec, Dims image) {
    auto axis = [&](std::size_t dim, const char* name) {
        const auto span = static_cast<std::ptrdiff_t>(dim + 2 * spec.p) - static_cast<std::ptrdiff_t>(spec.k);
        if (spec.s == 0 || span < 0) {
            throw InvalidConfiguration("layer-mapper", std::string("non-positive output ") + name +
                                                           " for image extent " + std::to_string(dim));
        }
        return static_cast<std::size_t>(span) / spec.s + 1;
    };
    LayerDims d;
    d.conv = {axis(image.rows, "rows"), axis(image.cols, "cols")};
    d.pooled = {(d.conv.rows + spec.p_s - 1) / spec.p_s, (d.conv.cols + spec.p_s - 1) / spec.p_s};
    return d;
}

/// Real-valued weights laid out [c_o][c_in][k][k].
struct WeightTensor {
    std::size_t c_o = 0;
    std::size_t c_in = 0;
    std::size_t k = 0;
    std::vector<double> values;

    WeightTensor() = default;
    WeightTensor(std::size_t co, std::size_t ci, std::size_t kk)
        : c_o(co), c_in(ci), k(kk), values(co * ci * kk * kk, 0.0) {}

    [[nodiscard]] std::size_t index(std::size_t o, std::size_t ci, std::size_t ky, std::size_t kx) const noexcept {
        return ((o * c_in + ci) * k + ky) * k + kx;
    }
    [[nodiscard]] double at(std::size_t o, std::size_t ci, std::size_t ky, std::size_t kx) const noexcept {
        return values[index(o, ci, ky, kx)];
    }
    [[nodiscard]] double& at(std::size_t o, std::size_t ci, std::size_t ky, std::size_t kx) noexcept {
        return values[index(o, ci, ky, kx)];
    }
    [[nodiscard]] std::size_t taps_per_channel() const noexcept { return c_in * k * k; }
};

struct BnParams {
    std::vector<double> gamma;
    std::vector<double> beta;
    std::vector<double> mu;
    std::vector<double> sigma_sq;
    std::vector<double> epsilon;

    static BnParams identity(std::size_t channels, double eps = 1e-5) {
        return {std::vector<double>(channels, 1.0), std::vector<double>(channels, 0.0),
                std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0),
                std::vector<double>(channels, eps)};
    }

    [[nodiscard]] std::size_t channels() const noexcept { return gamma.size(); }
};

struct FusedWeights {
    WeightTensor scaled;         // A * theta
    std::vector<double> scale;   // A per channel
    std::vector<double> offsets; // B per channel
};

[[nodiscard]] inline FusedWeights fuse_bn(const WeightTensor& weights, const BnParams& bn) {
    const std::size_t n = weights.c_o;
    if (bn.gamma.size() != n || bn.beta.size() != n || bn.mu.size() != n || bn.sigma_sq.size() != n ||
        bn.epsilon.size() != n) {
        throw DimensionError("layer-mapper", "batch-norm arrays must have one entry per output channel");
    }
    FusedWeights fused{weights, std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t o = 0; o < n; ++o) {
        if (bn.sigma_sq[o] < 0.0) {
            throw InvalidParameter("layer-mapper", "sigma_sq < 0 in channel " + std::to_string(o));
        }
        if (!(bn.epsilon[o] > 0.0)) {
            throw InvalidParameter("layer-mapper", "epsilon must be > 0 in channel " + std::to_string(o));
        }
        const double inv_std = 1.0 / std::sqrt(bn.sigma_sq[o] + bn.epsilon[o]);
        const double a = bn.gamma[o] * inv_std;
        fused.scale[o] = a;
        fused.offsets[o] = bn.beta[o] - bn.gamma[o] * bn.mu[o] * inv_std;
        for (std::size_t t = 0; t < weights.taps_per_channel(); ++t) {
            fused.scaled.values[o * weights.taps_per_channel() + t] *= a;
        }
    }
    return fused;
}

/// Sign-magnitude weights. Each tap's magnitude lives in exactly one of the
/// positive or negative cycle planes; the other plane holds zero.
struct QuantizedWeights {
    std::size_t c_o = 0;
    std::size_t c_in = 0;
    std::size_t k = 0;
    std::vector<std::uint8_t> positive;
    std::vector<std::uint8_t> negative;
    double weight_scale = 0.0;

    [[nodiscard]] std::size_t index(std::size_t o, std::size_t ci, std::size_t ky, std::size_t kx) const noexcept {
        return ((o * c_in + ci) * k + ky) * k + kx;
    }
    [[nodiscard]] int signed_magnitude(std::size_t i) const noexcept {
        return static_cast<int>(positive[i]) - static_cast<int>(negative[i]);
    }
};

[[nodiscard]] inline QuantizedWeights quantize_weights(const WeightTensor& scaled, int mag_bits = 4) {
    if (mag_bits != 3 && mag_bits != 4) {
        throw InvalidParameter("layer-mapper", "weight magnitude bits must be 3 or 4");
    }
    const double max_mag = static_cast<double>((1 << mag_bits) - 1);
    double max_abs = 0.0;
    for (double w : scaled.values) {
        if (!std::isfinite(w)) {
            throw InvalidParameter("layer-mapper", "non-finite weight");
        }
        max_abs = std::max(max_abs, std::abs(w));
    }

    QuantizedWeights q;
    q.c_o = scaled.c_o;
    q.c_in = scaled.c_in;
    q.k = scaled.k;
    q.positive.assign(scaled.values.size(), 0);
    q.negative.assign(scaled.values.size(), 0);
    q.weight_scale = max_abs / max_mag;
    if (q.weight_scale == 0.0) {
        return q;
    }
    for (std::size_t i = 0; i < scaled.values.size(); ++i) {
        const double w = scaled.values[i];
        const auto mag = static_cast<std::uint8_t>(std::min(std::lround(std::abs(w) / q.weight_scale),
                                                            static_cast<long>(max_mag)));
        (w > 0.0 ? q.positive : q.negative)[i] = mag;
    }
    return q;
}

struct FusedLayer {
    WeightTensor scaled_weights;
    std::vector<double> offsets;
    QuantizedWeights quantized;
};

[[nodiscard]] inline FusedLayer make_fused_layer(const WeightTensor& weights, const BnParams& bn,
                                                 const ConvSpec& spec) {
    spec.validate();
    if (weights.c_o != spec.c_o || weights.c_in != spec.c_in || weights.k != spec.k) {
        throw DimensionError("layer-mapper", "weight tensor shape does not match the convolution spec");
    }
    auto fused = fuse_bn(weights, bn);
    auto q = quantize_weights(fused.scaled, spec.weight_mag_bits);
    return {std::move(fused.scaled), std::move(fused.offsets), std::move(q)};
}

struct OutputNode {
    std::size_t row = 0;
    std::size_t col = 0;
};

struct ScheduleCycle {
    std::vector<OutputNode> windows;
    std::size_t active_pixels = 0;
};

/// Cycles for one channel pass; the pass repeats for each output channel
/// after a weight reload.
struct Schedule {
    std::vector<ScheduleCycle> cycles;
    std::size_t channel_passes = 1;
    std::size_t windows_per_cycle = 0; // capacity from the parallel-activation formula
    Dims conv;

    [[nodiscard]] std::size_t total_cycles() const noexcept { return cycles.size() * channel_passes; }
};

/// Output nodes that fit in one row band simultaneously.
[[nodiscard]] inline std::size_t parallel_windows(const ConvSpec& spec, std::size_t width) {
    if (width + 2 * spec.p < spec.k) {
        return 0;
    }
    const std::size_t pitch = spec.s * std::lcm(spec.k, spec.s);
    return (width + 2 * spec.p - spec.k) / pitch;
}

[[nodiscard]] inline std::size_t pixels_per_window(const ConvSpec& spec) noexcept {
    return spec.k * spec.k * spec.c_in;
}

/// Cycles take one output row at a time. Within a row, output columns are
/// grouped by residue modulo lcm(k, s) so neighbouring windows sit
/// s*lcm(k, s) sites apart and never share a column; each residue class is
/// split into cycles holding at most parallel_windows() windows.
[[nodiscard]] inline Schedule build_schedule(const ConvSpec& spec, Dims image) {
    spec.validate();
    if (image.rows + 2 * spec.p < spec.k || image.cols + 2 * spec.p < spec.k) {
        throw ScheduleError("layer-mapper", "image " + std::to_string(image.rows) + "x" +
                                                std::to_string(image.cols) + " is smaller than the " +
                                                std::to_string(spec.k) + "x" + std::to_string(spec.k) + " kernel");
    }
    const auto dims = output_dims(spec, image);
    const std::size_t period = std::lcm(spec.k, spec.s);
    const std::size_t capacity = std::max<std::size_t>(1, parallel_windows(spec, image.cols));

    Schedule schedule;
    schedule.channel_passes = spec.c_o;
    schedule.windows_per_cycle = capacity;
    schedule.conv = dims.conv;
    for (std::size_t oy = 0; oy < dims.conv.rows; ++oy) {
        for (std::size_t phase = 0; phase < std::min(period, dims.conv.cols); ++phase) {
            ScheduleCycle cycle;
            for (std::size_t ox = phase; ox < dims.conv.cols; ox += period) {
                if (cycle.windows.size() == capacity) {
                    cycle.active_pixels = cycle.windows.size() * pixels_per_window(spec);
                    schedule.cycles.push_back(std::move(cycle));
                    cycle = {};
                }
                cycle.windows.push_back({oy, ox});
            }
            cycle.active_pixels = cycle.windows.size() * pixels_per_window(spec);
            schedule.cycles.push_back(std::move(cycle));
        }
    }
    return schedule;
}

} // namespace ctia_ipc
