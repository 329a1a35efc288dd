#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "ctia_ipc/runner.hpp"

using namespace ctia_ipc;
namespace fs = std::filesystem;

namespace {

class TempDir {
  public:
    explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / ("ctia_ipc_" + name)) {
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] const fs::path& path() const { return path_; }

  private:
    fs::path path_;
};

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        files[e.path().filename().string()] = io::read_file(e.path());
    }
    return files;
}

RunConfig small_config(RunMode mode) {
    nlohmann::json doc = {{"seed", 7},
                          {"conv", {{"c_o", 4}}},
                          {"inputs", {{"random_rows", 32}, {"random_cols", 32}}},
                          {"mismatch", {{"sigma_gain", 0.01}, {"trials", 50}}},
                          {"metrics", {{"image_rows", 64}, {"image_cols", 80}}},
                          {"sweep", {{"x_points", 5}}}};
    return parse_config(doc, mode, ".");
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

} // namespace

TEST(Config, DefaultsAndOverrides) {
    const auto cfg = parse_config(nlohmann::json::object(), RunMode::Metrics, ".");
    EXPECT_EQ(cfg.conv.k, 7U);
    EXPECT_EQ(cfg.metrics_image, (Dims{1024, 1280}));
    const auto over = small_config(RunMode::Simulate);
    EXPECT_EQ(over.conv.c_o, 4U);
    EXPECT_EQ(over.mismatch.seed, 7U);
}

TEST(Config, CollectsAllIssues) {
    const nlohmann::json doc = {{"wtc", {{"window", 5}}},
                                {"adc", {{"v_fs", "big"}}},
                                {"conv", {{"k", -1}}},
                                {"inputs", {{"weights", "no/such/file.json"}}}};
    try {
        (void)parse_config(doc, RunMode::Simulate, ".");
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_GE(e.issues().size(), 4U) << e.what();
    }
}

TEST(Runner, EveryModeProducesItsArtifacts) {
    const std::map<RunMode, std::vector<std::string>> expected{
        {RunMode::Simulate, {"activation_ch00.pgm", "activation_ch03.pgm", "activation_index.csv"}},
        {RunMode::Verify, {"verify_report.json"}},
        {RunMode::Sweep, {"sweep.csv", "sweep_fit.csv"}},
        {RunMode::MonteCarlo, {"montecarlo.csv", "montecarlo_summary.json"}},
        {RunMode::Metrics, {"metrics.json"}},
        {RunMode::ExportTransfer, {"transfer_samples.csv", "transfer_coeffs.csv"}},
        {RunMode::Readout, {"readout.csv"}},
    };
    for (const auto& [mode, files] : expected) {
        TempDir dir(std::string("mode_") + std::string(to_string(mode)));
        const auto outcome = execute(small_config(mode), dir.path(), 2);
        EXPECT_EQ(outcome.exit_code, exit_ok) << to_string(mode);
        for (const auto& f : files) {
            EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
        }
        const auto manifest = nlohmann::json::parse(io::read_file(dir.path() / "run_manifest.json"));
        EXPECT_EQ(manifest["config"]["mode"], std::string(to_string(mode)));
        EXPECT_EQ(manifest["exit_code"], 0);
    }
}

TEST(Runner, ActivationFilesDecode) {
    TempDir dir("activation_decode");
    (void)execute(small_config(RunMode::Simulate), dir.path());
    const auto img = io::decode_pgm(io::read_file(dir.path() / "activation_ch01.pgm"));
    // 32x32 mosaic -> 16x16 sites -> conv 5x5 -> pooled 3x3
    EXPECT_EQ(img.rows, 3U);
    EXPECT_EQ(img.cols, 3U);
    for (auto v : img.samples) {
        EXPECT_LE(v, 15);
    }
}

TEST(Runner, VerifyPassesOnRandomCase) {
    TempDir dir("verify64");
    auto cfg = small_config(RunMode::Verify);
    cfg.conv.c_o = 16;
    cfg.random_frame = {64, 64};
    const auto outcome = execute(cfg, dir.path());
    EXPECT_EQ(outcome.exit_code, exit_ok);
    EXPECT_EQ(outcome.summary["fraction_within_one"], 1.0);
}

TEST(Runner, VerifyFailureExitsTwo) {
    // A negative tolerance can never be met.
    TempDir dir("verify_fail");
    auto cfg = small_config(RunMode::Verify);
    cfg.thresholds.max_abs_delta = -1;
    const auto outcome = execute(cfg, dir.path());
    EXPECT_EQ(outcome.exit_code, exit_verification);
}

TEST(Runner, RerunsAreByteIdenticalAcrossThreadCounts) {
    for (auto mode : {RunMode::Simulate, RunMode::Verify, RunMode::MonteCarlo, RunMode::Sweep}) {
        TempDir a("det_a");
        TempDir b("det_b");
        (void)execute(small_config(mode), a.path(), 1);
        (void)execute(small_config(mode), b.path(), 4);
        EXPECT_EQ(snapshot(a.path()), snapshot(b.path())) << to_string(mode);
    }
}

TEST(Runner, ExitCodes) {
    TempDir dir("exit_codes");
    std::ostringstream err;
    EXPECT_EQ(run("frobnicate", dir.path() / "c.json", std::nullopt, dir.path(), err), exit_validation);
    EXPECT_NE(err.str().find("unknown mode"), std::string::npos);

    EXPECT_EQ(run("metrics", dir.path() / "missing.json", std::nullopt, dir.path(), err), exit_io);

    write_text(dir.path() / "bad.json", R"({"conv": {"k": 0}})");
    EXPECT_EQ(run("metrics", dir.path() / "bad.json", std::nullopt, dir.path(), err), exit_validation);

    write_text(dir.path() / "broken.json", "{");
    EXPECT_EQ(run("metrics", dir.path() / "broken.json", std::nullopt, dir.path(), err), exit_validation);

    write_text(dir.path() / "frame.pgm", "P5\n4 4\n255\n");
    write_text(dir.path() / "uses_frame.json", R"({"inputs": {"frame": "frame.pgm"}})");
    EXPECT_EQ(run("simulate", dir.path() / "uses_frame.json", std::nullopt, dir.path() / "out", err), exit_validation);
    EXPECT_FALSE(fs::exists(dir.path() / "out" / "run_manifest.json"));

    write_text(dir.path() / "ok.json", R"({"metrics": {"image_rows": 64, "image_cols": 64}})");
    EXPECT_EQ(run("metrics", dir.path() / "ok.json", 5, dir.path() / "ok", err), exit_ok);
    const auto manifest = nlohmann::json::parse(io::read_file(dir.path() / "ok" / "run_manifest.json"));
    EXPECT_EQ(manifest["config"]["seed"], 5);
}

TEST(Cli, BinaryRunsAndRejectsUnknownMode) {
    TempDir dir("cli");
    write_text(dir.path() / "c.json", R"({"metrics": {"image_rows": 64, "image_cols": 64}})");
    const std::string exe = CTIA_IPC_SIM_PATH;
    const auto cmd = [&](const std::string& args) {
        const int status = std::system((exe + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    EXPECT_EQ(cmd("metrics --config " + (dir.path() / "c.json").string() + " --out " + (dir.path() / "o").string()), 0);
    EXPECT_TRUE(fs::exists(dir.path() / "o" / "metrics.json"));
    EXPECT_NE(cmd("frobnicate --config " + (dir.path() / "c.json").string()), 0);
    EXPECT_EQ(cmd("metrics"), exit_validation);
}
