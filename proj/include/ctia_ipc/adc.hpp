#pragma once

// Column-parallel single-slope ADC with digital CDS. The up/down counter
// converts the positive-weight sample counting up and the negative-weight
// sample counting down, starting from a preloaded batch-norm offset. ReLU,
// requantization and pooling follow in the digital periphery.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ctia_ipc/error.hpp"

namespace ctia_ipc {

struct AdcConfig {
    int bits = 6;
    double v_fs = 0.64;       // V, ramp span
    int bn_offset_codes = 0;  // counter preload
    int out_bits = 4;

    [[nodiscard]] double lsb() const noexcept { return v_fs / static_cast<double>(1 << bits); }
    [[nodiscard]] int max_code() const noexcept { return (1 << bits) - 1; }
    [[nodiscard]] int max_output() const noexcept { return (1 << out_bits) - 1; }

    void validate() const {
        if (bits < 1 || bits > 16) {
            throw InvalidConfiguration("adc-periph", "ADC resolution must be 1..16 bits");
        }
        if (out_bits < 1 || out_bits > bits) {
            throw InvalidConfiguration("adc-periph", "out_bits must satisfy 1 <= out_bits <= bits");
        }
        if (!std::isfinite(v_fs) || v_fs <= 0.0) {
            throw InvalidConfiguration("adc-periph", "v_fs must be finite and > 0");
        }
    }
};

/// Counter value when the ramp crosses `v`.
[[nodiscard]] inline int quantize(const AdcConfig& cfg, double v) {
    if (!(v >= 0.0)) {
        throw InvalidState("adc-periph", "ADC input must be a non-negative voltage");
    }
    const double steps = std::floor(v / cfg.lsb());
    return steps >= cfg.max_code() ? cfg.max_code() : static_cast<int>(steps);
}

[[nodiscard]] inline int cds_signed(const AdcConfig& cfg, double v_pos, double v_neg) {
    return quantize(cfg, v_pos) - quantize(cfg, v_neg) + cfg.bn_offset_codes;
}

/// ReLU on the signed counter value, then drop LSBs down to out_bits.
[[nodiscard]] inline std::uint16_t relu_requantize(const AdcConfig& cfg, int code) noexcept {
    const int clipped = std::max(code, 0);
    return static_cast<std::uint16_t>(std::min(clipped >> (cfg.bits - cfg.out_bits), cfg.max_output()));
}

struct ActivationMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint16_t> values;

    ActivationMap() = default;
    ActivationMap(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0) {}

    [[nodiscard]] std::uint16_t at(std::size_t r, std::size_t c) const noexcept { return values[r * cols + c]; }
    [[nodiscard]] std::uint16_t& at(std::size_t r, std::size_t c) noexcept { return values[r * cols + c]; }

    friend bool operator==(const ActivationMap&, const ActivationMap&) = default;
};

/// Non-overlapping max pooling; ragged edges pool over the partial window.
[[nodiscard]] inline ActivationMap maxpool(const ActivationMap& map, std::size_t stride) {
    if (map.rows == 0 || map.cols == 0) {
        throw InvalidInput("adc-periph", "cannot pool an empty activation map");
    }
    if (stride < 1) {
        throw InvalidParameter("adc-periph", "pooling stride must be >= 1");
    }
    ActivationMap out((map.rows + stride - 1) / stride, (map.cols + stride - 1) / stride);
    for (std::size_t r = 0; r < map.rows; ++r) {
        for (std::size_t c = 0; c < map.cols; ++c) {
            auto& cell = out.at(r / stride, c / stride);
            cell = std::max(cell, map.at(r, c));
        }
    }
    return out;
}

} // namespace ctia_ipc
