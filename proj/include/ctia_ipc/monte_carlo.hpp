#pragma once

// Mismatch Monte Carlo of one kernel window at a fixed weight and
// photocurrent. Global draws are shared by every instance in a trial; local
// draws are independent per pixel and per accumulation capacitor.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ctia_ipc/array_core.hpp"
#include "ctia_ipc/device_model.hpp"
#include "ctia_ipc/error.hpp"
#include "ctia_ipc/parallel.hpp"
#include "ctia_ipc/wtc.hpp"

namespace ctia_ipc {

struct MismatchSpec {
    double sigma_cap = 0.0;  // relative, local
    double sigma_vrst = 0.0; // V, local
    double sigma_gain = 0.0; // relative, local
    double global_sigma_cap = 0.0;
    double global_sigma_vrst = 0.0;
    double global_sigma_gain = 0.0;
    std::size_t trials = 1000;
    std::uint64_t seed = 1;
    std::size_t bins = 30;

    void validate() const {
        for (double s : {sigma_cap, sigma_vrst, sigma_gain, global_sigma_cap, global_sigma_vrst, global_sigma_gain}) {
            if (!(s >= 0.0) || !std::isfinite(s)) {
                throw InvalidParameter("metrics-mc", "mismatch sigmas must be finite and >= 0");
            }
        }
        if (trials < 1) {
            throw InvalidParameter("metrics-mc", "Monte Carlo needs at least one trial");
        }
        if (bins < 1) {
            throw InvalidParameter("metrics-mc", "histogram needs at least one bin");
        }
    }
};

struct MonteCarloSetup {
    PixelParams pixel;
    ArrayConfig array;
    CounterConfig wtc;
    int weight = 15;
    double x_norm = 1.0;
    std::size_t k = 7; // window spans 2k x 2k pixels (k x k RGGB quads)
};

struct Histogram {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::size_t> counts;
};

struct MonteCarloResult {
    double nominal = 0.0;
    std::vector<double> samples;
    double mean = 0.0;
    double stddev = 0.0;
    Histogram histogram;
};

namespace detail {

struct NormalStream {
    std::mt19937_64 engine;
    std::normal_distribution<double> normal{0.0, 1.0};

    NormalStream(std::uint64_t seed, std::uint64_t trial) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32U),
                          static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32U)};
        engine.seed(seq);
    }

    double operator()() { return normal(engine); }
};

struct NoDraws {
    double operator()() const { return 0.0; }
};

// One evaluation of the window's ADC-input voltage. Draw order is fixed:
// globals, then per pixel in column-then-row order, then the divider caps.
template <class Draw>
double evaluate_window(const MonteCarloSetup& setup, const MismatchSpec& mm, Draw&& draw) {
    const double g_cf = 1.0 + mm.global_sigma_cap * draw();
    const double g_c1 = 1.0 + mm.global_sigma_cap * draw();
    const double g_c2 = 1.0 + mm.global_sigma_cap * draw();
    const double g_cfacc = 1.0 + mm.global_sigma_cap * draw();
    const double g_gain = 1.0 + mm.global_sigma_gain * draw();
    const double g_vrst = mm.global_sigma_vrst * draw();

    const double exposure = match_time(setup.wtc, WeightWord(setup.weight));
    const double current = setup.pixel.i_max * setup.x_norm;
    const std::size_t side = 2 * setup.k;

    std::vector<double> columns;
    columns.reserve(side);
    std::vector<double> contributions(side);
    for (std::size_t c = 0; c < side; ++c) {
        for (std::size_t r = 0; r < side; ++r) {
            PixelParams p = setup.pixel;
            p.c_f = setup.pixel.c_f * g_cf * (1.0 + mm.sigma_cap * draw());
            const double gain = g_gain * (1.0 + mm.sigma_gain * draw());
            const double offset = g_vrst + mm.sigma_vrst * draw();
            contributions[r] = std::max(0.0, integrate(p, std::max(0.0, current * gain), exposure) + offset);
        }
        columns.push_back(accumulate_column(contributions));
    }

    ArrayConfig array = setup.array;
    array.c1 = setup.array.c1 * g_c1 * (1.0 + mm.sigma_cap * draw());
    array.c2 = setup.array.c2 * g_c2 * (1.0 + mm.sigma_cap * draw());
    array.c_f_acc = setup.array.c_f_acc * g_cfacc * (1.0 + mm.sigma_cap * draw());
    return combine_columns(array, columns);
}

} // namespace detail

[[nodiscard]] inline Histogram make_histogram(const std::vector<double>& samples, double mean, double stddev,
                                              std::size_t bins) {
    Histogram h;
    h.counts.assign(bins, 0);
    h.lo = mean - 4.0 * stddev;
    h.hi = mean + 4.0 * stddev;
    if (!(stddev > 0.0)) {
        h.counts[bins / 2] = samples.size();
        return h;
    }
    const double width = (h.hi - h.lo) / static_cast<double>(bins);
    for (double v : samples) {
        const double pos = std::floor((v - h.lo) / width);
        const auto bin = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
        ++h.counts[bin];
    }
    return h;
}

/// Each trial seeds its own stream from (seed, trial index), so the sample
/// list is reproducible at any thread count.
[[nodiscard]] inline MonteCarloResult monte_carlo(const MonteCarloSetup& setup, const MismatchSpec& mm,
                                                  std::size_t threads = 0) {
    mm.validate();
    setup.pixel.validate();
    setup.array.validate();
    setup.wtc.validate();
    if (setup.k < 1) {
        throw InvalidParameter("metrics-mc", "Monte Carlo window needs k >= 1");
    }

    MonteCarloResult result;
    result.nominal = detail::evaluate_window(setup, mm, detail::NoDraws{});
    result.samples.resize(mm.trials);
    parallel_for(mm.trials, resolve_threads(threads), [&](std::size_t t) {
        detail::NormalStream stream(mm.seed, t);
        result.samples[t] = detail::evaluate_window(setup, mm, stream);
    });

    // Offsets from the first sample keep identical samples exact.
    const double pivot = result.samples.front();
    double sum = 0.0;
    for (double v : result.samples) {
        sum += v - pivot;
    }
    result.mean = pivot + sum / static_cast<double>(mm.trials);
    double ss = 0.0;
    for (double v : result.samples) {
        ss += (v - result.mean) * (v - result.mean);
    }
    result.stddev = mm.trials > 1 ? std::sqrt(ss / static_cast<double>(mm.trials - 1)) : 0.0;
    result.histogram = make_histogram(result.samples, result.mean, result.stddev, mm.bins);
    return result;
}

} // namespace ctia_ipc
