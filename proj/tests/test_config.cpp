#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mdcsim/config.hpp"

using namespace mdcsim;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const std::string& body, const char* name = "mdcsim_cfg.json") {
    const fs::path p = fs::temp_directory_path() / name;
    std::ofstream f(p, std::ios::binary);
    f << body;
    return p;
}

}  // namespace

TEST_CASE("empty config file yields the documented defaults") {
    const fs::path p = write_config("{}");
    const RunConfig cfg = load_run_config(p);
    CHECK(!cfg.map_file.has_value());
    CHECK(cfg.synthetic.width == 3000.0);
    CHECK(cfg.synthetic.n_entries == 20);
    CHECK(cfg.mobility.wave_period == 180.0);
    CHECK(cfg.mobility.wave_size == 200);
    CHECK(cfg.grid_resolution == 40);
    CHECK(cfg.grid_window == 60.0);
    CHECK(cfg.n_aps == 30);
    CHECK(cfg.n_mdcs == 3);
    REQUIRE(cfg.scenarios.size() == 4);
    CHECK(cfg.scenarios[0] == ScenarioTag::C3);
    REQUIRE(cfg.services.size() == 2);
    CHECK(cfg.services[0].name == "inference");
    CHECK(cfg.services[1].name == "training");
    CHECK(cfg.mdc.capacity() == 160);
    CHECK(cfg.power.idle_w == 47.0);
    CHECK(cfg.power.active_w == 95.0);
    CHECK(cfg.sim.sample_interval_s == 60.0);
    CHECK(cfg.sim.retry_interval_s == 1.0);
    CHECK(cfg.out_dir == "out");
    fs::remove(p);
}

TEST_CASE("full config parse picks up every section") {
    const fs::path p = write_config(R"({
        "map": {"synthetic": {"width": 1200, "height": 900, "entries": 6,
                               "areas": 4, "hospitals": 2}},
        "mobility": {"wave_period": 90, "wave_size": 10, "walk_speed": 1.2,
                     "dwell_min": 100, "dwell_max": 200, "duration": 3600,
                     "sample_step": 2},
        "placement": {"resolution": 25, "window": 30, "aps": 12, "mdcs": 2},
        "scenarios": ["H3", "C3"],
        "services": [{"name": "ping", "periodic": true, "period": 5,
                      "op_time": 0.5, "payload_bytes": 10, "header_bytes": 4}],
        "mdc": {"pus": 4, "threads_per_pu": 8},
        "power": {"idle_w": 10, "active_w": 25},
        "sim": {"duration": 1800, "sample_interval": 30, "retry_interval": 2,
                "keep_log": false},
        "seed": 123,
        "warmup": 600,
        "out_dir": "results"
    })");
    const RunConfig cfg = load_run_config(p);
    CHECK(cfg.synthetic.width == 1200.0);
    CHECK(cfg.synthetic.n_hospitals == 2);
    CHECK(cfg.mobility.wave_period == 90.0);
    CHECK(cfg.mobility.sample_step == 2.0);
    CHECK(cfg.grid_resolution == 25);
    CHECK(cfg.n_mdcs == 2);
    REQUIRE(cfg.scenarios.size() == 2);
    CHECK(cfg.scenarios[0] == ScenarioTag::H3);
    REQUIRE(cfg.services.size() == 1);
    CHECK(cfg.services[0].name == "ping");
    CHECK(cfg.services[0].period_s == 5.0);
    CHECK(cfg.services[0].total_bytes() == 14);
    CHECK(cfg.mdc.capacity() == 32);
    CHECK(cfg.power.active_w == 25.0);
    CHECK(cfg.sim.duration_s == 1800.0);
    CHECK(!cfg.sim.keep_log);
    CHECK(cfg.sim.seed == 123);
    CHECK(cfg.warmup_s == 600.0);
    CHECK(cfg.out_dir == "results");
    fs::remove(p);
}

TEST_CASE("unknown keys are rejected by name") {
    const fs::path p = write_config(R"({"mobilty": {}})");
    CHECK_THROWS_WITH_AS(load_run_config(p), doctest::Contains("mobilty"), ConfigError);
    const fs::path p2 = write_config(R"({"mobility": {"wave_preiod": 9}})");
    CHECK_THROWS_WITH_AS(load_run_config(p2), doctest::Contains("mobility.wave_preiod"),
                         ConfigError);
    fs::remove(p);
    fs::remove(p2);
}

TEST_CASE("type mismatches name the offending key") {
    const fs::path p = write_config(R"({"seed": "seven"})");
    CHECK_THROWS_WITH_AS(load_run_config(p), doctest::Contains("seed"), ConfigError);
    const fs::path p2 = write_config(R"({"sim": {"keep_log": 1}})");
    CHECK_THROWS_WITH_AS(load_run_config(p2), doctest::Contains("sim.keep_log"), ConfigError);
    const fs::path p3 = write_config(R"({"map": {}})");
    CHECK_THROWS_WITH_AS(load_run_config(p3), doctest::Contains("map"), ConfigError);
    const fs::path p4 = write_config(R"({"scenarios": ["X9"]})");
    CHECK_THROWS_WITH_AS(load_run_config(p4), doctest::Contains("scenarios"), ConfigError);
    const fs::path p5 = write_config("{ not json");
    CHECK_THROWS_AS(load_run_config(p5), ConfigError);
    for (const fs::path& q : {p, p2, p3, p4, p5}) fs::remove(q);
}

TEST_CASE("relative map.file is resolved against the config directory") {
    const fs::path dir = fs::temp_directory_path() / "mdcsim_cfg_dir";
    fs::create_directories(dir);
    std::ofstream(dir / "cfg.json") << R"({"map": {"file": "m.json"}})";
    const RunConfig cfg = load_run_config(dir / "cfg.json");
    REQUIRE(cfg.map_file.has_value());
    CHECK(*cfg.map_file == dir / "m.json");
    fs::remove_all(dir);
}

TEST_CASE("config round trips through its JSON writer") {
    const fs::path p = write_config(R"({
        "mobility": {"wave_size": 33},
        "placement": {"mdcs": 5},
        "seed": 42,
        "sim": {"duration": 900},
        "warmup": 100
    })");
    const RunConfig cfg = load_run_config(p);
    const fs::path p2 = write_config(run_config_to_json(cfg), "mdcsim_cfg_rt.json");
    const RunConfig back = load_run_config(p2);
    CHECK(back.mobility.wave_size == 33);
    CHECK(back.n_mdcs == 5);
    CHECK(back.sim.seed == 42);
    CHECK(back.sim.duration_s == 900.0);
    CHECK(run_config_to_json(back) == run_config_to_json(cfg));
    fs::remove(p);
    fs::remove(p2);
}

TEST_CASE("validation rejects inconsistent settings by key") {
    RunConfig cfg;
    cfg.sim.duration_s = 100.0;
    cfg.warmup_s = 100.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("warmup"), ConfigError);
    cfg = {};
    cfg.n_mdcs = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("placement.mdcs"), ConfigError);
    cfg = {};
    cfg.synthetic.n_entries = 0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("entries"), ConfigError);
    cfg = {};
    cfg.power.active_w = 1.0;
    CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("power"), ConfigError);
    cfg = {};
    cfg.scenarios.clear();
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("file hashing and run manifests are stable") {
    const fs::path a = write_config("hello\n", "mdcsim_hash_a");
    const fs::path b = write_config("hello\n", "mdcsim_hash_b");
    const fs::path c = write_config("hello!\n", "mdcsim_hash_c");
    CHECK(hash_file(a) == hash_file(b));
    CHECK(hash_file(a) != hash_file(c));
    CHECK_THROWS(hash_file(fs::temp_directory_path() / "mdcsim_does_not_exist"));

    RunConfig cfg;
    cfg.out_dir = "somewhere";
    const fs::path m1 = fs::temp_directory_path() / "mdcsim_manifest1.json";
    const fs::path m2 = fs::temp_directory_path() / "mdcsim_manifest2.json";
    write_run_manifest(cfg, {a}, m1);
    cfg.out_dir = "elsewhere";  // output location must not affect the manifest
    write_run_manifest(cfg, {b}, m2);
    std::ifstream f1(m1, std::ios::binary), f2(m2, std::ios::binary);
    const std::string s1((std::istreambuf_iterator<char>(f1)), {});
    std::string s2((std::istreambuf_iterator<char>(f2)), {});
    // The two manifests differ only in the hashed file's name.
    const auto pos = s2.find("mdcsim_hash_b");
    REQUIRE(pos != std::string::npos);
    s2.replace(pos, 13, "mdcsim_hash_a");
    CHECK(s1 == s2);
    for (const fs::path& q : {a, b, c, m1, m2}) fs::remove(q);
}
