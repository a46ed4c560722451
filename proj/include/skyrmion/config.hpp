#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace skyrmion {

/// Experiment parameters. Read from a flat "key = value" file; every key is
/// optional and unknown keys are errors.
struct ExperimentConfig {
    int cluster_a = 3;
    int cluster_b = 2;
    double J = -0.5;
    double D = 1.0;
    double B = 0.5;

    double field_min = 0.0;
    double field_max = 1.0;
    double field_step = 0.02;

    std::optional<std::size_t> measurement_site;  // nullopt = center
    int n_measurements = 3;
    std::vector<double> dt_list = {0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};

    double t_max = 300.0;
    double sample_every = 0.5;
    double trace_dt = 0.1;
    double trace_sample_every = 0.02;

    double propagator_dt = 0.5;
    double tail_tol = 1e-14;
    double residual_tol = 1e-9;
    double degeneracy_tol = 1e-8;

    std::size_t spectrum_k = 30;
    double spectrum_dt = 0.1;

    int q_grid = 64;
    std::vector<double> sf_fields = {0.3, 0.4, 0.5, 0.6};
    double sf_dt = 0.1;

    std::filesystem::path output_dir = "out";
    std::filesystem::path cache_dir;  // empty = <output_dir>/cache

    /// Canonical key/value listing in declaration order.
    std::vector<std::pair<std::string, std::string>> snapshot() const;
    /// Throws ConfigError on an invalid combination.
    void validate() const;
    std::filesystem::path effective_cache_dir() const;
};

/// Sets one key from its text value; throws ConfigError on unknown keys or
/// malformed values.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Applies "key=value".
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

/// Parses a config file on top of the defaults. '#' starts a comment;
/// repeated keys are errors.
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace skyrmion
