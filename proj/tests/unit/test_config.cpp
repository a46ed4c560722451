#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "skyrmion/config.hpp"
#include "skyrmion/errors.hpp"

using namespace skyrmion;
namespace fs = std::filesystem;

namespace {

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path p = fs::temp_directory_path() / ("skyrmion_cfg_" + name);
    std::ofstream(p) << text;
    return p;
}

}  // namespace

TEST_CASE("defaults validate") {
    const ExperimentConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    CHECK(cfg.cluster_a == 3);
    CHECK(cfg.cluster_b == 2);
    CHECK(cfg.effective_cache_dir() == fs::path("out") / "cache");
}

TEST_CASE("file parsing with comments and lists") {
    const auto p = write_file("ok.cfg",
                              "# field scan\n"
                              "B = 0.4   # inline comment\n"
                              "\n"
                              "dt_list = 0.1, 0.2 ,0.3\n"
                              "measurement_site = 5\n"
                              "output_dir = results/run1\n");
    const ExperimentConfig cfg = load_config(p);
    CHECK(cfg.B == 0.4);
    CHECK(cfg.dt_list == std::vector<double>{0.1, 0.2, 0.3});
    CHECK(cfg.measurement_site == 5u);
    CHECK(cfg.output_dir == fs::path("results/run1"));
    CHECK(cfg.J == -0.5);
}

TEST_CASE("strict parsing") {
    CHECK_THROWS_AS(load_config(write_file("unknown.cfg", "Bfield = 1\n")), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("dup.cfg", "B = 1\nB = 2\n")), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("noeq.cfg", "B 1\n")), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("nan.cfg", "B = nan\n")), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("trail.cfg", "B = 0.5x\n")), ConfigError);
    CHECK_THROWS_AS(load_config(write_file("list.cfg", "dt_list = 0.1,,0.2\n")), ConfigError);
    CHECK_THROWS_AS(load_config(fs::temp_directory_path() / "skyrmion_cfg_missing.cfg"), ConfigError);

    try {
        load_config(write_file("line.cfg", "B = 1\n\nJ = oops\n"));
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("overrides") {
    ExperimentConfig cfg;
    apply_override(cfg, "B=0.25");
    apply_override(cfg, " n_measurements = 2 ");
    apply_override(cfg, "measurement_site=center");
    CHECK(cfg.B == 0.25);
    CHECK(cfg.n_measurements == 2);
    CHECK_FALSE(cfg.measurement_site);
    CHECK_THROWS_AS(apply_override(cfg, "B"), ConfigError);
    CHECK_THROWS_AS(apply_override(cfg, "nope=1"), ConfigError);
}

TEST_CASE("validation") {
    auto invalid = [](const std::string& assignment) {
        ExperimentConfig cfg;
        apply_override(cfg, assignment);
        CHECK_THROWS_AS(cfg.validate(), ConfigError);
    };
    invalid("cluster_a=5");  // N = 39
    invalid("cluster_a=0");
    invalid("D=-1");
    invalid("field_step=0");
    invalid("field_min=2");
    invalid("measurement_site=19");
    invalid("n_measurements=0");
    invalid("dt_list=0.1,-0.2");
    invalid("t_max=1");
    invalid("sample_every=0.1");
    invalid("q_grid=8");
    invalid("spectrum_k=0");
    invalid("spectrum_k=1000");
    invalid("tail_tol=0");
}

TEST_CASE("snapshot round trip") {
    ExperimentConfig cfg;
    apply_override(cfg, "B=0.1");
    apply_override(cfg, "sf_fields=0.3,0.35");
    apply_override(cfg, "measurement_site=4");
    ExperimentConfig copy;
    for (const auto& [k, v] : cfg.snapshot()) set_config_value(copy, k, v);
    CHECK(copy.snapshot() == cfg.snapshot());
    CHECK(copy.sf_fields == cfg.sf_fields);
    CHECK(copy.measurement_site == 4u);
}
