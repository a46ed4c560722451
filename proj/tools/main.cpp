#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "oracle/checks.hpp"
#include "skyrmion/config.hpp"
#include "skyrmion/errors.hpp"
#include "skyrmion/experiments.hpp"
#include "skyrmion/parallel.hpp"

namespace {

int selftest() {
    int failures = 0;
    for (const auto& c : oracle::run_checks()) {
        fmt::print("{} {} error={:.3e} tol={:.0e}\n", c.pass() ? "ok  " : "FAIL", c.name, c.error, c.tolerance);
        if (!c.pass()) ++failures;
    }
    fmt::print("{} oracle check(s) failed\n", failures);
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum skyrmion measurement experiments on periodic triangular clusters"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    int threads = 0;
    app.add_option("--config", config_path, "key = value configuration file")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override one key (key=value); repeatable");
    app.add_option("--out", out_dir, "output directory (overrides output_dir)");
    app.add_option("--threads", threads, "OpenMP threads (default: runtime choice)")->check(CLI::PositiveNumber);

    const std::map<std::string, std::string> pipelines = {
        {"phase-diagram", "ground-state chirality and magnetization across the field scan"},
        {"quench", "one center-site measurement followed by free evolution"},
        {"zeno-scan", "chirality after repeated measurements for each interval in dt_list"},
        {"zeno-trace", "time-resolved chirality and overlap across repeated measurements"},
        {"spectrum", "low-lying levels and post-measurement ensemble energies"},
        {"structure-factor", "longitudinal structure factor maps"},
        {"selftest", "matrix-free kernels against dense matrices on N <= 7"},
    };
    for (const auto& [name, help] : pipelines) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        if (threads > 0) skyrmion::parallel::set_threads(threads);
        if (command == "selftest") return selftest();

        skyrmion::ExperimentConfig cfg = config_path.empty() ? skyrmion::ExperimentConfig{} : skyrmion::load_config(config_path);
        for (const auto& o : overrides) skyrmion::apply_override(cfg, o);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        cfg.validate();
        if (cfg.n_measurements > 3) {
            std::clog << fmt::format("warning: n_measurements = {}; branch count grows as 2^m\n", cfg.n_measurements);
        }

        skyrmion::ExperimentRunner run(cfg);
        if (command == "phase-diagram") {
            skyrmion::run_phase_diagram(run);
        } else if (command == "quench") {
            skyrmion::run_quench(run);
        } else if (command == "zeno-scan") {
            skyrmion::run_zeno_scan(run);
        } else if (command == "zeno-trace") {
            skyrmion::run_zeno_trace(run);
        } else if (command == "spectrum") {
            skyrmion::run_spectrum(run);
        } else {
            skyrmion::run_structure_factor(run);
        }
        run.finish(command);
        std::clog << fmt::format("{}: outputs in {}\n", command, cfg.output_dir.string());
        return 0;
    } catch (const skyrmion::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const skyrmion::PhysicsError& e) {
        std::cerr << "physics contract violated: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
