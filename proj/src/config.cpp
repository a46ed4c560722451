#include "skyrmion/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include <fmt/format.h>

#include "skyrmion/errors.hpp"
#include "skyrmion/solver.hpp"

namespace skyrmion {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, v));
    }
    return out;
}

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(fmt::format("{}: '{}' is not an integer", key, v));
    }
    return out;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
    const long long n = parse_int(key, v);
    if (n < 0) throw ConfigError(fmt::format("{}: must be >= 0, got {}", key, n));
    return static_cast<std::size_t>(n);
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= v.size()) {
        const std::size_t comma = v.find(',', start);
        const std::string item = trim(std::string_view(v).substr(start, comma - start));
        if (item.empty()) throw ConfigError(fmt::format("{}: empty list entry in '{}'", key, v));
        out.push_back(parse_double(key, item));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string format_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += fmt::format("{}{:.17g}", i ? "," : "", v[i]);
    return s;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    auto dbl = [](double ExperimentConfig::*field) {
        return Setter([field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*field = parse_double(k, v);
        });
    };
    auto list = [](std::vector<double> ExperimentConfig::*field) {
        return Setter([field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            c.*field = parse_list(k, v);
        });
    };
    auto integer = [](int ExperimentConfig::*field) {
        return Setter([field](ExperimentConfig& c, const std::string& k, const std::string& v) {
            const long long n = parse_int(k, v);
            if (n < -1000000 || n > 1000000) throw ConfigError(fmt::format("{}: {} is out of range", k, n));
            c.*field = static_cast<int>(n);
        });
    };
    static const std::map<std::string, Setter> table = {
        {"cluster_a", integer(&ExperimentConfig::cluster_a)},
        {"cluster_b", integer(&ExperimentConfig::cluster_b)},
        {"J", dbl(&ExperimentConfig::J)},
        {"D", dbl(&ExperimentConfig::D)},
        {"B", dbl(&ExperimentConfig::B)},
        {"field_min", dbl(&ExperimentConfig::field_min)},
        {"field_max", dbl(&ExperimentConfig::field_max)},
        {"field_step", dbl(&ExperimentConfig::field_step)},
        {"measurement_site",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) {
             if (v == "center") {
                 c.measurement_site.reset();
             } else {
                 c.measurement_site = parse_count(k, v);
             }
         }},
        {"n_measurements", integer(&ExperimentConfig::n_measurements)},
        {"dt_list", list(&ExperimentConfig::dt_list)},
        {"t_max", dbl(&ExperimentConfig::t_max)},
        {"sample_every", dbl(&ExperimentConfig::sample_every)},
        {"trace_dt", dbl(&ExperimentConfig::trace_dt)},
        {"trace_sample_every", dbl(&ExperimentConfig::trace_sample_every)},
        {"propagator_dt", dbl(&ExperimentConfig::propagator_dt)},
        {"tail_tol", dbl(&ExperimentConfig::tail_tol)},
        {"residual_tol", dbl(&ExperimentConfig::residual_tol)},
        {"degeneracy_tol", dbl(&ExperimentConfig::degeneracy_tol)},
        {"spectrum_k",
         [](ExperimentConfig& c, const std::string& k, const std::string& v) { c.spectrum_k = parse_count(k, v); }},
        {"spectrum_dt", dbl(&ExperimentConfig::spectrum_dt)},
        {"q_grid", integer(&ExperimentConfig::q_grid)},
        {"sf_fields", list(&ExperimentConfig::sf_fields)},
        {"sf_dt", dbl(&ExperimentConfig::sf_dt)},
        {"output_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.output_dir = v; }},
        {"cache_dir", [](ExperimentConfig& c, const std::string&, const std::string& v) { c.cache_dir = v; }},
    };
    return table;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::snapshot() const {
    auto num = [](double v) { return fmt::format("{:.17g}", v); };
    return {
        {"cluster_a", std::to_string(cluster_a)},
        {"cluster_b", std::to_string(cluster_b)},
        {"J", num(J)},
        {"D", num(D)},
        {"B", num(B)},
        {"field_min", num(field_min)},
        {"field_max", num(field_max)},
        {"field_step", num(field_step)},
        {"measurement_site", measurement_site ? std::to_string(*measurement_site) : "center"},
        {"n_measurements", std::to_string(n_measurements)},
        {"dt_list", format_list(dt_list)},
        {"t_max", num(t_max)},
        {"sample_every", num(sample_every)},
        {"trace_dt", num(trace_dt)},
        {"trace_sample_every", num(trace_sample_every)},
        {"propagator_dt", num(propagator_dt)},
        {"tail_tol", num(tail_tol)},
        {"residual_tol", num(residual_tol)},
        {"degeneracy_tol", num(degeneracy_tol)},
        {"spectrum_k", std::to_string(spectrum_k)},
        {"spectrum_dt", num(spectrum_dt)},
        {"q_grid", std::to_string(q_grid)},
        {"sf_fields", format_list(sf_fields)},
        {"sf_dt", num(sf_dt)},
        {"output_dir", output_dir.string()},
        {"cache_dir", cache_dir.string()},
    };
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const std::string& msg) {
        if (!ok) throw ConfigError(msg);
    };
    const long long n_sites = static_cast<long long>(cluster_a) * cluster_a + static_cast<long long>(cluster_a) * cluster_b +
                              static_cast<long long>(cluster_b) * cluster_b;
    require(cluster_a >= 1 && cluster_b >= 0 && n_sites >= 3, "cluster tilt must have a >= 1, b >= 0 and N >= 3");
    require(n_sites <= 24, fmt::format("cluster with N = {} sites is beyond the supported 24", n_sites));
    require(D >= 0.0, "D must be >= 0");
    require(field_step > 0.0, "field_step must be positive");
    require(field_min <= field_max, "field scan is empty: field_min > field_max");
    if (measurement_site) {
        require(static_cast<long long>(*measurement_site) < n_sites,
                fmt::format("measurement_site {} outside the {}-site cluster", *measurement_site, n_sites));
    }
    require(n_measurements >= 1, "n_measurements must be >= 1");
    require(!dt_list.empty(), "dt_list is empty");
    for (double dt : dt_list) require(dt > 0.0, fmt::format("dt_list entry {} is not positive", dt));
    require(t_max >= 0.0, "t_max must be >= 0");
    const double dt_max = *std::max_element(dt_list.begin(), dt_list.end());
    require(t_max >= dt_max * n_measurements, "t_max must be at least max(dt_list) * n_measurements");
    require(propagator_dt > 0.0, "propagator_dt must be positive");
    require(sample_every >= propagator_dt, "sample_every must be >= propagator_dt");
    require(trace_dt > 0.0 && trace_sample_every > 0.0, "trace_dt and trace_sample_every must be positive");
    require(trace_sample_every <= trace_dt, "trace_sample_every must not exceed trace_dt");
    require(tail_tol > 0.0 && residual_tol > 0.0 && degeneracy_tol > 0.0, "tolerances must be positive");
    require(spectrum_k >= 1 && spectrum_k <= SolverOptions{}.max_states,
            fmt::format("spectrum_k must be in [1, {}]", SolverOptions{}.max_states));
    require(spectrum_dt > 0.0 && sf_dt > 0.0, "spectrum_dt and sf_dt must be positive");
    require(q_grid >= 16, "q_grid must be >= 16");
    require(!output_dir.empty(), "output_dir is empty");
}

std::filesystem::path ExperimentConfig::effective_cache_dir() const {
    return cache_dir.empty() ? output_dir / "cache" : cache_dir;
}

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(fmt::format("unknown configuration key '{}'", key));
    it->second(cfg, key, value);
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("override '{}' is not key=value", assignment));
    set_config_value(cfg, trim(std::string_view(assignment).substr(0, eq)), trim(std::string_view(assignment).substr(eq + 1)));
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        const std::string body = trim(std::string_view(line).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(fmt::format("{}:{}: expected key = value", path.string(), lineno));
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError(fmt::format("{}:{}: key '{}' given twice", path.string(), lineno, key));
        }
        try {
            set_config_value(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
        }
    }
    return cfg;
}

}  // namespace skyrmion
