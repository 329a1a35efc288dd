#pragma once

// Run configuration document (JSON). Every field has a default; the fully
// resolved configuration is written back out as the run manifest.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctia_ipc/error.hpp"
#include "ctia_ipc/golden.hpp"
#include "ctia_ipc/io.hpp"
#include "ctia_ipc/layer_mapper.hpp"
#include "ctia_ipc/monte_carlo.hpp"
#include "ctia_ipc/simulator.hpp"
#include "ctia_ipc/sweep.hpp"

namespace ctia_ipc {

enum class RunMode { Simulate, Verify, Sweep, MonteCarlo, Metrics, ExportTransfer, Readout };

[[nodiscard]] inline std::string_view to_string(RunMode m) noexcept {
    switch (m) {
    case RunMode::Simulate: return "simulate";
    case RunMode::Verify: return "verify";
    case RunMode::Sweep: return "sweep";
    case RunMode::MonteCarlo: return "montecarlo";
    case RunMode::Metrics: return "metrics";
    case RunMode::ExportTransfer: return "export-transfer";
    case RunMode::Readout: return "readout";
    }
    return "unknown";
}

[[nodiscard]] inline std::optional<RunMode> parse_run_mode(std::string_view s) noexcept {
    for (auto m : {RunMode::Simulate, RunMode::Verify, RunMode::Sweep, RunMode::MonteCarlo, RunMode::Metrics,
                   RunMode::ExportTransfer, RunMode::Readout}) {
        if (to_string(m) == s) {
            return m;
        }
    }
    return std::nullopt;
}

struct RunConfig {
    RunMode mode = RunMode::Simulate;
    std::uint64_t seed = 1;
    ChipConfig chip;
    ConvSpec conv;

    std::optional<std::filesystem::path> frame_path;
    std::optional<std::filesystem::path> weights_path;
    Dims random_frame{64, 64}; // used when no frame file is given

    ComparisonThresholds thresholds;

    MismatchSpec mismatch;
    int mc_weight = 15;
    double mc_x_norm = 1.0;
    std::size_t mc_k = 7;

    Dims metrics_image{1024, 1280};
    double power_per_pixel = 3.26e-6;
    std::optional<double> cycle_time;

    SweepConfig sweep;
    std::vector<SweepMode> sweep_modes{SweepMode::VsWeight, SweepMode::VsCurrent, SweepMode::VsProduct,
                                       SweepMode::MultiWindow};

    std::optional<std::filesystem::path> transfer_samples;
    int transfer_degree = 1;

    std::optional<double> readout_exposure;

    [[nodiscard]] MonteCarloSetup monte_carlo_setup() const {
        return {chip.pixel, chip.array, chip.wtc, mc_weight, mc_x_norm, mc_k};
    }
};

namespace detail {

using json = nlohmann::json;

class ConfigReader {
  public:
    explicit ConfigReader(std::vector<std::string>& issues) : issues_(issues) {}

    const json* section(const json& doc, const char* key) {
        if (!doc.contains(key)) {
            return nullptr;
        }
        const auto& s = doc.at(key);
        if (!s.is_object()) {
            issues_.push_back(std::string(key) + ": must be an object");
            return nullptr;
        }
        return &s;
    }

    void number(const json* obj, const char* prefix, const char* key, double& out) {
        if (obj == nullptr || !obj->contains(key)) {
            return;
        }
        const auto& v = obj->at(key);
        if (!v.is_number() || !std::isfinite(v.get<double>())) {
            issues_.push_back(std::string(prefix) + "." + key + ": must be a finite number");
            return;
        }
        out = v.get<double>();
    }

    void optional_number(const json* obj, const char* prefix, const char* key, std::optional<double>& out) {
        if (obj == nullptr || !obj->contains(key) || obj->at(key).is_null()) {
            return;
        }
        double v = 0.0;
        number(obj, prefix, key, v);
        out = v;
    }

    template <class Int>
    void integer(const json* obj, const char* prefix, const char* key, Int& out) {
        if (obj == nullptr || !obj->contains(key)) {
            return;
        }
        const auto& v = obj->at(key);
        if (!v.is_number_integer() || (std::is_unsigned_v<Int> && v.get<std::int64_t>() < 0)) {
            issues_.push_back(std::string(prefix) + "." + key + ": must be " +
                              (std::is_unsigned_v<Int> ? "a non-negative integer" : "an integer"));
            return;
        }
        out = v.get<Int>();
    }

    void path(const json* obj, const char* prefix, const char* key, const std::filesystem::path& base,
              std::optional<std::filesystem::path>& out) {
        if (obj == nullptr || !obj->contains(key) || obj->at(key).is_null()) {
            return;
        }
        const auto& v = obj->at(key);
        if (!v.is_string()) {
            issues_.push_back(std::string(prefix) + "." + key + ": must be a path string");
            return;
        }
        std::filesystem::path p = v.get<std::string>();
        if (p.is_relative()) {
            p = base / p;
        }
        if (!std::filesystem::exists(p)) {
            issues_.push_back(std::string(prefix) + "." + key + ": " + p.string() + " does not exist");
        }
        out = p;
    }

    void issue(std::string message) { issues_.push_back(std::move(message)); }

  private:
    std::vector<std::string>& issues_;
};

template <class Fn>
void check(std::vector<std::string>& issues, Fn&& validate) {
    try {
        validate();
    } catch (const Error& e) {
        issues.emplace_back(e.what());
    }
}

} // namespace detail

/// Relative input paths resolve against `base_dir` (the config file's directory).
[[nodiscard]] inline RunConfig parse_config(const nlohmann::json& doc, RunMode mode,
                                            const std::filesystem::path& base_dir) {
    std::vector<std::string> issues;
    if (!doc.is_object()) {
        throw ValidationError("cli-io", {"configuration must be a JSON object"});
    }
    detail::ConfigReader rd(issues);
    RunConfig cfg;
    cfg.mode = mode;
    rd.integer(&doc, "config", "seed", cfg.seed);

    if (const auto* s = rd.section(doc, "pixel")) {
        rd.number(s, "pixel", "v_rst", cfg.chip.pixel.v_rst);
        rd.number(s, "pixel", "c_f", cfg.chip.pixel.c_f);
        rd.number(s, "pixel", "i_max", cfg.chip.pixel.i_max);
        rd.number(s, "pixel", "headroom", cfg.chip.pixel.headroom);
    }
    if (const auto* s = rd.section(doc, "array")) {
        rd.integer(s, "array", "rows", cfg.chip.array.rows);
        rd.integer(s, "array", "cols", cfg.chip.array.cols);
        rd.number(s, "array", "c1", cfg.chip.array.c1);
        rd.number(s, "array", "c2", cfg.chip.array.c2);
        rd.number(s, "array", "c_f_acc", cfg.chip.array.c_f_acc);
    }
    if (const auto* s = rd.section(doc, "wtc")) {
        rd.number(s, "wtc", "t_step", cfg.chip.wtc.t_step);
        rd.integer(s, "wtc", "window", cfg.chip.wtc.window);
    }
    if (const auto* s = rd.section(doc, "adc")) {
        rd.integer(s, "adc", "bits", cfg.chip.adc.bits);
        rd.number(s, "adc", "v_fs", cfg.chip.adc.v_fs);
        rd.integer(s, "adc", "out_bits", cfg.chip.adc.out_bits);
    }
    if (const auto* s = rd.section(doc, "conv")) {
        rd.integer(s, "conv", "k", cfg.conv.k);
        rd.integer(s, "conv", "s", cfg.conv.s);
        rd.integer(s, "conv", "p", cfg.conv.p);
        rd.integer(s, "conv", "c_o", cfg.conv.c_o);
        rd.integer(s, "conv", "n_b", cfg.conv.n_b);
        rd.integer(s, "conv", "p_s", cfg.conv.p_s);
        rd.integer(s, "conv", "weight_mag_bits", cfg.conv.weight_mag_bits);
    }
    if (const auto* s = rd.section(doc, "inputs")) {
        rd.path(s, "inputs", "frame", base_dir, cfg.frame_path);
        rd.path(s, "inputs", "weights", base_dir, cfg.weights_path);
        rd.integer(s, "inputs", "random_rows", cfg.random_frame.rows);
        rd.integer(s, "inputs", "random_cols", cfg.random_frame.cols);
    }
    if (const auto* s = rd.section(doc, "verify")) {
        rd.integer(s, "verify", "max_abs_delta", cfg.thresholds.max_abs_delta);
        rd.number(s, "verify", "min_fraction_within_one", cfg.thresholds.min_fraction_within_one);
    }
    if (const auto* s = rd.section(doc, "mismatch")) {
        rd.number(s, "mismatch", "sigma_cap", cfg.mismatch.sigma_cap);
        rd.number(s, "mismatch", "sigma_vrst", cfg.mismatch.sigma_vrst);
        rd.number(s, "mismatch", "sigma_gain", cfg.mismatch.sigma_gain);
        rd.number(s, "mismatch", "global_sigma_cap", cfg.mismatch.global_sigma_cap);
        rd.number(s, "mismatch", "global_sigma_vrst", cfg.mismatch.global_sigma_vrst);
        rd.number(s, "mismatch", "global_sigma_gain", cfg.mismatch.global_sigma_gain);
        rd.integer(s, "mismatch", "trials", cfg.mismatch.trials);
        rd.integer(s, "mismatch", "bins", cfg.mismatch.bins);
        rd.integer(s, "mismatch", "weight", cfg.mc_weight);
        rd.number(s, "mismatch", "x_norm", cfg.mc_x_norm);
        rd.integer(s, "mismatch", "k", cfg.mc_k);
    }
    if (const auto* s = rd.section(doc, "metrics")) {
        rd.integer(s, "metrics", "image_rows", cfg.metrics_image.rows);
        rd.integer(s, "metrics", "image_cols", cfg.metrics_image.cols);
        rd.number(s, "metrics", "power_per_pixel", cfg.power_per_pixel);
        rd.optional_number(s, "metrics", "cycle_time", cfg.cycle_time);
    }
    if (const auto* s = rd.section(doc, "sweep")) {
        rd.integer(s, "sweep", "x_points", cfg.sweep.x_points);
        if (s->contains("kernel_sizes")) {
            const auto& ks = s->at("kernel_sizes");
            if (!ks.is_array()) {
                rd.issue("sweep.kernel_sizes: must be an array of positive integers");
            } else {
                cfg.sweep.kernel_sizes.clear();
                for (const auto& k : ks) {
                    if (!k.is_number_integer() || k.get<std::int64_t>() < 1) {
                        rd.issue("sweep.kernel_sizes: entries must be positive integers");
                        continue;
                    }
                    cfg.sweep.kernel_sizes.push_back(k.get<std::size_t>());
                }
            }
        }
        if (s->contains("modes")) {
            const auto& ms = s->at("modes");
            cfg.sweep_modes.clear();
            if (!ms.is_array()) {
                rd.issue("sweep.modes: must be an array of mode names");
            } else {
                for (const auto& m : ms) {
                    const auto parsed = m.is_string() ? parse_sweep_mode(m.get<std::string>()) : std::nullopt;
                    if (!parsed) {
                        rd.issue("sweep.modes: unknown mode " + m.dump());
                        continue;
                    }
                    cfg.sweep_modes.push_back(*parsed);
                }
            }
        }
    }
    if (const auto* s = rd.section(doc, "transfer")) {
        rd.path(s, "transfer", "samples", base_dir, cfg.transfer_samples);
        rd.integer(s, "transfer", "degree", cfg.transfer_degree);
    }
    if (const auto* s = rd.section(doc, "readout")) {
        rd.optional_number(s, "readout", "exposure", cfg.readout_exposure);
    }

    cfg.mismatch.seed = cfg.seed;
    detail::check(issues, [&] { cfg.chip.validate(); });
    detail::check(issues, [&] { cfg.conv.validate(); });
    detail::check(issues, [&] { cfg.mismatch.validate(); });
    if (cfg.mc_weight < 0 || cfg.mc_weight > WeightWord::max_magnitude) {
        issues.emplace_back("mismatch.weight: must be in [0, 15]");
    }
    if (!(cfg.mc_x_norm >= 0.0 && cfg.mc_x_norm <= 1.0)) {
        issues.emplace_back("mismatch.x_norm: must be in [0, 1]");
    }
    if (cfg.transfer_degree < 1) {
        issues.emplace_back("transfer.degree: must be >= 1");
    }
    if (cfg.random_frame.rows % 2 != 0 || cfg.random_frame.cols % 2 != 0 || cfg.random_frame.rows == 0 ||
        cfg.random_frame.cols == 0) {
        issues.emplace_back("inputs.random_rows/random_cols: must be positive and even");
    }
    if (!issues.empty()) {
        throw ValidationError("cli-io", issues);
    }
    return cfg;
}

/// Fully resolved configuration, suitable for reproducing a run exactly.
[[nodiscard]] inline nlohmann::json to_json(const RunConfig& cfg) {
    using nlohmann::json;
    auto opt_path = [](const std::optional<std::filesystem::path>& p) {
        return p ? json(p->generic_string()) : json(nullptr);
    };
    auto opt_num = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
    json modes = json::array();
    for (auto m : cfg.sweep_modes) {
        modes.push_back(std::string(to_string(m)));
    }
    const auto& c = cfg.chip;
    return json{
        {"mode", std::string(to_string(cfg.mode))},
        {"seed", cfg.seed},
        {"pixel", {{"v_rst", c.pixel.v_rst}, {"c_f", c.pixel.c_f}, {"i_max", c.pixel.i_max}, {"headroom", c.pixel.headroom}}},
        {"array", {{"rows", c.array.rows}, {"cols", c.array.cols}, {"c1", c.array.c1}, {"c2", c.array.c2}, {"c_f_acc", c.array.c_f_acc}}},
        {"wtc", {{"t_step", c.wtc.t_step}, {"window", c.wtc.window}, {"width", CounterConfig::width}}},
        {"adc", {{"bits", c.adc.bits}, {"v_fs", c.adc.v_fs}, {"out_bits", c.adc.out_bits}}},
        {"conv", {{"k", cfg.conv.k}, {"s", cfg.conv.s}, {"p", cfg.conv.p}, {"c_o", cfg.conv.c_o}, {"c_in", cfg.conv.c_in},
                  {"n_b", cfg.conv.n_b}, {"p_s", cfg.conv.p_s}, {"weight_mag_bits", cfg.conv.weight_mag_bits}}},
        {"inputs", {{"frame", opt_path(cfg.frame_path)}, {"weights", opt_path(cfg.weights_path)},
                    {"random_rows", cfg.random_frame.rows}, {"random_cols", cfg.random_frame.cols}}},
        {"verify", {{"max_abs_delta", cfg.thresholds.max_abs_delta},
                    {"min_fraction_within_one", cfg.thresholds.min_fraction_within_one}}},
        {"mismatch", {{"sigma_cap", cfg.mismatch.sigma_cap}, {"sigma_vrst", cfg.mismatch.sigma_vrst},
                      {"sigma_gain", cfg.mismatch.sigma_gain}, {"global_sigma_cap", cfg.mismatch.global_sigma_cap},
                      {"global_sigma_vrst", cfg.mismatch.global_sigma_vrst},
                      {"global_sigma_gain", cfg.mismatch.global_sigma_gain}, {"trials", cfg.mismatch.trials},
                      {"bins", cfg.mismatch.bins}, {"weight", cfg.mc_weight}, {"x_norm", cfg.mc_x_norm}, {"k", cfg.mc_k}}},
        {"metrics", {{"image_rows", cfg.metrics_image.rows}, {"image_cols", cfg.metrics_image.cols},
                     {"power_per_pixel", cfg.power_per_pixel}, {"cycle_time", opt_num(cfg.cycle_time)}}},
        {"sweep", {{"x_points", cfg.sweep.x_points}, {"kernel_sizes", cfg.sweep.kernel_sizes}, {"modes", modes}}},
        {"transfer", {{"samples", opt_path(cfg.transfer_samples)}, {"degree", cfg.transfer_degree}}},
        {"readout", {{"exposure", opt_num(cfg.readout_exposure)}}},
    };
}

} // namespace ctia_ipc
