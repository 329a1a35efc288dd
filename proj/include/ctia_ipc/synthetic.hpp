#pragma once

// Seeded random inputs for verification runs and property tests.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ctia_ipc/bayer_frame.hpp"
#include "ctia_ipc/io.hpp"
#include "ctia_ipc/layer_mapper.hpp"

namespace ctia_ipc {

[[nodiscard]] inline BayerFrame random_frame(std::size_t rows, std::size_t cols, double i_max, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::uint32_t> code(0, BayerFrame::full_code);
    std::vector<std::uint16_t> codes(rows * cols);
    for (auto& c : codes) {
        c = static_cast<std::uint16_t>(code(rng));
    }
    return {rows, cols, i_max, std::move(codes)};
}

/// Weights uniform in [-1, 1]; batch-norm statistics in ranges typical of a
/// trained first layer.
[[nodiscard]] inline io::LayerWeights random_layer(const ConvSpec& spec, std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
    std::uniform_real_distribution<double> weight(-1.0, 1.0);
    std::uniform_real_distribution<double> gamma(0.5, 1.5);
    std::uniform_real_distribution<double> shift(-0.5, 0.5);
    std::uniform_real_distribution<double> variance(0.5, 2.0);

    io::LayerWeights layer{WeightTensor(spec.c_o, spec.c_in, spec.k), {}};
    for (auto& w : layer.weights.values) {
        w = weight(rng);
    }
    for (std::size_t o = 0; o < spec.c_o; ++o) {
        layer.bn.gamma.push_back(gamma(rng));
        layer.bn.beta.push_back(shift(rng));
        layer.bn.mu.push_back(shift(rng));
        layer.bn.sigma_sq.push_back(variance(rng));
        layer.bn.epsilon.push_back(1e-5);
    }
    return layer;
}

} // namespace ctia_ipc
