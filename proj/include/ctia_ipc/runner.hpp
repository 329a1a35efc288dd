#pragma once

// Mode dispatch for the command-line tool. Artifacts are staged in memory and
// written only after the whole mode has succeeded.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ctia_ipc/config.hpp"
#include "ctia_ipc/golden.hpp"
#include "ctia_ipc/io.hpp"
#include "ctia_ipc/metrics.hpp"
#include "ctia_ipc/monte_carlo.hpp"
#include "ctia_ipc/simulator.hpp"
#include "ctia_ipc/sweep.hpp"
#include "ctia_ipc/synthetic.hpp"

namespace ctia_ipc {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_verification = 2, exit_io = 3 };

struct RunOutcome {
    int exit_code = exit_ok;
    std::vector<std::string> artifacts;
    nlohmann::json summary;
};

namespace detail {

using json = nlohmann::json;

struct Staged {
    std::vector<std::pair<std::string, std::string>> files;

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
};

inline BayerFrame input_frame(const RunConfig& cfg) {
    if (cfg.frame_path) {
        return io::load_frame(*cfg.frame_path, cfg.chip.pixel.i_max);
    }
    return random_frame(cfg.random_frame.rows, cfg.random_frame.cols, cfg.chip.pixel.i_max, cfg.seed);
}

inline io::LayerWeights input_layer(const RunConfig& cfg) {
    if (cfg.weights_path) {
        return io::load_weights(*cfg.weights_path);
    }
    return random_layer(cfg.conv, cfg.seed);
}

inline json report_json(const ComparisonReport& r, const ComparisonThresholds& t) {
    return {{"elements", r.elements},
            {"max_abs_delta", r.max_abs_delta},
            {"fraction_exact", r.fraction_exact},
            {"fraction_within_one", r.fraction_within_one},
            {"passed", r.passed},
            {"thresholds", {{"max_abs_delta", t.max_abs_delta}, {"min_fraction_within_one", t.min_fraction_within_one}}}};
}

inline json run_simulate(const RunConfig& cfg, std::size_t threads, Staged& out) {
    const auto frame = input_frame(cfg);
    const auto layer = input_layer(cfg);
    const auto fused = make_fused_layer(layer.weights, layer.bn, cfg.conv);
    const auto result = simulate_layer(frame, fused, cfg.conv, cfg.chip, threads);

    io::CsvWriter index("channel,file,rows,cols");
    for (std::size_t o = 0; o < result.pooled.size(); ++o) {
        const auto name = "activation_ch" + std::string(o < 10 ? "0" : "") + std::to_string(o) + ".pgm";
        const auto& map = result.pooled[o];
        out.add(name, io::encode_pgm(map.rows, map.cols, map.values));
        index.row(o, name, map.rows, map.cols);
    }
    out.add("activation_index.csv", index.str());
    return {{"channels", result.pooled.size()},
            {"pooled_rows", result.pooled.front().rows},
            {"pooled_cols", result.pooled.front().cols},
            {"weight_scale", fused.quantized.weight_scale}};
}

inline json run_verify(const RunConfig& cfg, std::size_t threads, Staged& out, bool& passed) {
    const auto frame = input_frame(cfg);
    const auto layer = input_layer(cfg);
    const auto fused = make_fused_layer(layer.weights, layer.bn, cfg.conv);
    const auto sim = simulate_layer(frame, fused, cfg.conv, cfg.chip, threads);
    const auto gold = golden_layer(frame, fused, cfg.conv, cfg.chip.adc, cfg.chip.calibration());
    const auto report = compare_runs(sim.pooled, gold.pooled, cfg.thresholds);
    passed = report.passed;
    const auto doc = report_json(report, cfg.thresholds);
    out.add("verify_report.json", doc.dump(2) + "\n");
    return doc;
}

inline json run_sweep(const RunConfig& cfg, Staged& out) {
    io::CsvWriter table("mode,k,w_norm,x_norm,v_cbl,v_adc_in,code");
    io::CsvWriter fits("mode,k,slope,intercept,r_squared,residual_rms");
    json summary = json::array();
    for (auto mode : cfg.sweep_modes) {
        const auto rows = linearity_sweep(cfg.chip, mode, cfg.sweep);
        for (const auto& r : rows) {
            table.row(to_string(r.mode), r.k, r.w_norm, r.x_norm, r.v_cbl, r.v_adc_in, r.code);
        }
        std::vector<std::size_t> ks{1};
        if (mode == SweepMode::MultiWindow) {
            ks = cfg.sweep.kernel_sizes;
        }
        for (auto k : ks) {
            // vs_weight at a fixed input and vs_current at a fixed weight still
            // span distinct products, so every group is fittable.
            const auto fit = sweep_fit(rows, mode, k);
            fits.row(to_string(mode), k, fit.slope, fit.intercept, fit.r_squared, fit.residual_rms);
            summary.push_back({{"mode", std::string(to_string(mode))}, {"k", k}, {"r_squared", fit.r_squared}});
        }
    }
    out.add("sweep.csv", table.str());
    out.add("sweep_fit.csv", fits.str());
    return summary;
}

inline json run_montecarlo(const RunConfig& cfg, std::size_t threads, Staged& out) {
    const auto result = monte_carlo(cfg.monte_carlo_setup(), cfg.mismatch, threads);
    io::CsvWriter table("trial,v_adc_in");
    for (std::size_t t = 0; t < result.samples.size(); ++t) {
        table.row(t, result.samples[t]);
    }
    out.add("montecarlo.csv", table.str());
    const json summary{{"nominal", result.nominal},
                       {"mean", result.mean},
                       {"std", result.stddev},
                       {"histogram",
                        {{"lo", result.histogram.lo}, {"hi", result.histogram.hi}, {"counts", result.histogram.counts}}}};
    out.add("montecarlo_summary.json", summary.dump(2) + "\n");
    return summary;
}

inline json metrics_json(const MetricsReport& m) {
    return {{"br_printed", m.br_printed},
            {"br_bits", m.br_bits},
            {"activation_count_cycle0", m.activation_count_cycle0},
            {"total_ops", m.total_ops},
            {"cycles_per_frame", m.cycles_per_frame},
            {"cycle_time", m.cycle_time},
            {"frame_time", m.frame_time},
            {"energy", m.energy},
            {"ops_per_second", m.ops_per_second},
            {"ops_per_joule", m.ops_per_joule},
            {"reference",
             {{"br", m.reference.br},
              {"ops_per_second", m.reference.ops_per_second},
              {"ops_per_joule", m.reference.ops_per_joule},
              {"power_per_pixel", m.reference.power_per_pixel}}}};
}

inline json run_metrics(const RunConfig& cfg, Staged& out) {
    const auto m = compute_metrics(cfg.conv, cfg.metrics_image, cfg.chip.wtc, cfg.power_per_pixel, cfg.cycle_time);
    auto doc = metrics_json(m);
    out.add("metrics.json", doc.dump(2) + "\n");
    return doc;
}

inline std::vector<TransferSample> generated_transfer_samples(const RunConfig& cfg) {
    std::vector<TransferSample> samples;
    for (auto code : detail::x_grid(cfg.sweep.x_points)) {
        for (int m = 0; m <= WeightWord::max_magnitude; ++m) {
            const double x = static_cast<double>(code) / BayerFrame::full_code;
            const double volts =
                integrate(cfg.chip.pixel, cfg.chip.pixel.i_max * x, match_time(cfg.chip.wtc, WeightWord(m)));
            samples.push_back({static_cast<double>(m) / WeightWord::max_magnitude, x, volts});
        }
    }
    return samples;
}

inline json run_export_transfer(const RunConfig& cfg, Staged& out) {
    const auto samples = cfg.transfer_samples ? io::parse_transfer_csv(io::read_file(*cfg.transfer_samples))
                                              : generated_transfer_samples(cfg);
    const auto model = fit_polynomial(samples, cfg.transfer_degree);
    const auto linear = fit_transfer(samples);

    io::CsvWriter table("w_norm,x_norm,volts");
    for (const auto& s : samples) {
        table.row(s.w_norm, s.x_norm, s.volts);
    }
    io::CsvWriter coeffs("power,coefficient");
    for (std::size_t i = 0; i < model.coeffs.size(); ++i) {
        coeffs.row(i, model.coeffs[i]);
    }
    out.add("transfer_samples.csv", table.str());
    out.add("transfer_coeffs.csv", coeffs.str());
    return {{"degree", cfg.transfer_degree},
            {"clamp_lo", model.clamp_lo},
            {"clamp_hi", model.clamp_hi},
            {"linear_fit",
             {{"slope", linear.slope},
              {"intercept", linear.intercept},
              {"r_squared", linear.r_squared},
              {"residual_rms", linear.residual_rms}}}};
}

inline json run_readout(const RunConfig& cfg, Staged& out) {
    const auto frame = input_frame(cfg);
    ArrayConfig array = cfg.chip.array;
    array.mode = ArrayMode::Readout;
    const double exposure =
        cfg.readout_exposure.value_or(static_cast<double>(cfg.chip.wtc.max_exposure_ticks()) * cfg.chip.wtc.t_step);
    const auto volts = readout_frame(array, cfg.chip.pixel, frame, exposure);
    io::CsvWriter table("row,col,volts");
    for (std::size_t r = 0; r < frame.rows(); ++r) {
        for (std::size_t c = 0; c < frame.cols(); ++c) {
            table.row(r, c, volts[r * frame.cols() + c]);
        }
    }
    out.add("readout.csv", table.str());
    return {{"rows", frame.rows()}, {"cols", frame.cols()}, {"exposure", exposure}};
}

} // namespace detail

[[nodiscard]] inline int exit_code_for(const Error& e) noexcept {
    return dynamic_cast<const IoError*>(&e) != nullptr ? exit_io : exit_validation;
}

/// Executes one mode and writes its artifacts plus `run_manifest.json` into
/// `out_dir`. Errors propagate; the caller maps them to exit codes.
[[nodiscard]] inline RunOutcome execute(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                        std::size_t threads = 0) {
    detail::Staged staged;
    RunOutcome outcome;
    bool passed = true;
    switch (cfg.mode) {
    case RunMode::Simulate: outcome.summary = detail::run_simulate(cfg, threads, staged); break;
    case RunMode::Verify: outcome.summary = detail::run_verify(cfg, threads, staged, passed); break;
    case RunMode::Sweep: outcome.summary = detail::run_sweep(cfg, staged); break;
    case RunMode::MonteCarlo: outcome.summary = detail::run_montecarlo(cfg, threads, staged); break;
    case RunMode::Metrics: outcome.summary = detail::run_metrics(cfg, staged); break;
    case RunMode::ExportTransfer: outcome.summary = detail::run_export_transfer(cfg, staged); break;
    case RunMode::Readout: outcome.summary = detail::run_readout(cfg, staged); break;
    }
    outcome.exit_code = passed ? exit_ok : exit_verification;

    nlohmann::json artifacts = nlohmann::json::array();
    for (const auto& [name, content] : staged.files) {
        artifacts.push_back(name);
        outcome.artifacts.push_back(name);
    }
    const nlohmann::json manifest{{"config", to_json(cfg)},
                                  {"artifacts", artifacts},
                                  {"summary", outcome.summary},
                                  {"exit_code", outcome.exit_code}};
    staged.add("run_manifest.json", manifest.dump(2) + "\n");
    outcome.artifacts.emplace_back("run_manifest.json");

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw IoError("cli-io", "cannot create output directory " + out_dir.string());
    }
    for (const auto& [name, content] : staged.files) {
        io::atomic_write(out_dir / name, content);
    }
    return outcome;
}

/// Loads the config file, overrides the seed when given, executes the mode and
/// maps every failure onto the documented exit codes.
[[nodiscard]] inline int run(std::string_view mode_name, const std::filesystem::path& config_path,
                             std::optional<std::uint64_t> seed, const std::filesystem::path& out_dir,
                             std::ostream& err = std::cerr) {
    const auto mode = parse_run_mode(mode_name);
    if (!mode) {
        err << "cli-io: unknown mode '" << mode_name
            << "' (expected simulate, verify, sweep, montecarlo, metrics, export-transfer or readout)\n";
        return exit_validation;
    }
    try {
        nlohmann::json doc;
        const auto text = io::read_file(config_path);
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw FormatError("cli-io", std::string("config is not valid JSON: ") + e.what(), e.byte);
        }
        if (seed && doc.is_object()) {
            doc["seed"] = *seed;
        }
        const auto cfg = parse_config(doc, *mode, config_path.parent_path());
        const auto outcome = execute(cfg, out_dir);
        if (outcome.exit_code == exit_verification) {
            err << "golden-oracle: verification failed: " << outcome.summary.dump() << "\n";
        }
        return outcome.exit_code;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "cli-io: " << e.what() << "\n";
        return exit_validation;
    }
}

} // namespace ctia_ipc
