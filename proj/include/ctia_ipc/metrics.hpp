#pragma once

// Formula-level performance metrics: bandwidth reduction, operation count,
// and a per-pixel-power energy/throughput estimate over the schedule.

#include <cstddef>
#include <cstdint>
#include <optional>

#include "ctia_ipc/error.hpp"
#include "ctia_ipc/layer_mapper.hpp"
#include "ctia_ipc/wtc.hpp"

namespace ctia_ipc {

// Bits per raw sensor sample in the bandwidth comparison.
inline constexpr double raw_sample_bits = 12.0;

// Conversion time of the 6-bit ramp, in counter ticks.
inline constexpr std::int64_t adc_conversion_ticks = 64;

struct BandwidthReduction {
    double br_printed = 0.0; // I/O * 3/4 * 12/N_b * 1/p_s^2 with O counted before pooling
    double br_bits = 0.0;    // raw input bits over pooled output bits
};

[[nodiscard]] inline BandwidthReduction bandwidth_reduction(const ConvSpec& spec, Dims image) {
    spec.validate();
    const auto dims = output_dims(spec, image);
    const double input_elements = static_cast<double>(image.elements() * spec.c_in);
    const double conv_elements = static_cast<double>(dims.conv.elements() * spec.c_o);
    const double pooled_elements = static_cast<double>(dims.pooled.elements() * spec.c_o);
    if (conv_elements == 0.0 || pooled_elements == 0.0) {
        throw InvalidConfiguration("metrics-mc", "layer produces no output elements");
    }
    const double n_b = spec.n_b;
    const double p_s = static_cast<double>(spec.p_s);

    BandwidthReduction br;
    br.br_printed = input_elements / conv_elements * (3.0 / 4.0) * (raw_sample_bits / n_b) / (p_s * p_s);
    br.br_bits = input_elements * raw_sample_bits / (pooled_elements * n_b);
    return br;
}

/// Multiply and add per tap, per output element.
[[nodiscard]] inline std::uint64_t op_count(const ConvSpec& spec, Dims image) {
    const auto dims = output_dims(spec, image);
    return static_cast<std::uint64_t>(dims.conv.elements()) * spec.c_o * 2 * spec.k * spec.k * spec.c_in;
}

[[nodiscard]] inline double default_cycle_time(const CounterConfig& wtc) {
    return static_cast<double>(wtc.max_exposure_ticks() + adc_conversion_ticks) * wtc.t_step;
}

struct EnergyEstimate {
    double frame_time = 0.0;     // s
    double energy = 0.0;         // J
    double ops_per_second = 0.0;
    double ops_per_joule = 0.0;
};

/// Each scheduled cycle runs twice (positive and negative weights) and is
/// repeated once per channel pass.
[[nodiscard]] inline EnergyEstimate energy_estimate(const ConvSpec& spec, Dims image, double power_per_pixel,
                                                    const Schedule& schedule, double cycle_time) {
    if (!(power_per_pixel > 0.0) || !(cycle_time > 0.0)) {
        throw InvalidParameter("metrics-mc", "power per pixel and cycle time must be > 0");
    }
    double pixel_cycles = 0.0;
    for (const auto& cycle : schedule.cycles) {
        pixel_cycles += static_cast<double>(cycle.active_pixels);
    }
    const double passes = static_cast<double>(schedule.channel_passes);

    EnergyEstimate e;
    e.frame_time = static_cast<double>(schedule.total_cycles()) * cycle_time * 2.0;
    e.energy = pixel_cycles * passes * power_per_pixel * cycle_time * 2.0;
    e.ops_per_second = static_cast<double>(op_count(spec, image)) / e.frame_time;
    e.ops_per_joule = e.ops_per_second / (e.energy / e.frame_time);
    return e;
}

// Reported chip figures, carried for context only and never checked.
struct ReportedFigures {
    double br = 12.08;
    double ops_per_second = 1.98e9;
    double ops_per_joule = 3.39e9;
    double power_per_pixel = 3.26e-6;
};

struct MetricsReport {
    double br_printed = 0.0;
    double br_bits = 0.0;
    std::size_t activation_count_cycle0 = 0;
    std::uint64_t total_ops = 0;
    std::size_t cycles_per_frame = 0;
    double cycle_time = 0.0;
    double frame_time = 0.0;
    double energy = 0.0;
    double ops_per_second = 0.0;
    double ops_per_joule = 0.0;
    ReportedFigures reference;
};

[[nodiscard]] inline MetricsReport compute_metrics(const ConvSpec& spec, Dims image, const CounterConfig& wtc,
                                                   double power_per_pixel,
                                                   std::optional<double> cycle_time = std::nullopt) {
    const auto br = bandwidth_reduction(spec, image);
    const auto schedule = build_schedule(spec, image);
    MetricsReport report;
    report.br_printed = br.br_printed;
    report.br_bits = br.br_bits;
    report.activation_count_cycle0 = schedule.cycles.front().active_pixels;
    report.total_ops = op_count(spec, image);
    report.cycles_per_frame = schedule.total_cycles();
    report.cycle_time = cycle_time.value_or(default_cycle_time(wtc));
    const auto e = energy_estimate(spec, image, power_per_pixel, schedule, report.cycle_time);
    report.frame_time = e.frame_time;
    report.energy = e.energy;
    report.ops_per_second = e.ops_per_second;
    report.ops_per_joule = e.ops_per_joule;
    return report;
}

} // namespace ctia_ipc
