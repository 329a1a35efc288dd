#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ctia_ipc/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Behavioral simulator and verification harness for the CTIA in-pixel computing array"};
    app.set_help_flag("-h,--help", "Print this help message and exit");

    std::string mode;
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    app.add_option("mode", mode, "simulate | verify | sweep | montecarlo | metrics | export-transfer | readout")
        ->required();
    app.add_option("--config", config, "Run configuration (JSON)")->required();
    app.add_option("--seed", seed, "Override the configuration seed");
    app.add_option("--out", out, "Output directory for artifacts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ctia_ipc::exit_validation;
    }
    return ctia_ipc::run(mode, config, seed, out);
}
