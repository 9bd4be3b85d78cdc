#include "mdcsim/config.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace mdcsim {

using nlohmann::json;

namespace {

[[noreturn]] void bad_key(const std::string& key, const std::string& why) {
    throw ConfigError("config key \"" + key + "\": " + why);
}

double get_num(const json& obj, const std::string& scope, const std::string& key,
               double fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number()) bad_key(scope + key, "expected a number");
    return v.get<double>();
}

std::int64_t get_int(const json& obj, const std::string& scope, const std::string& key,
                     std::int64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer()) bad_key(scope + key, "expected an integer");
    return v.get<std::int64_t>();
}

void check_keys(const json& obj, const std::string& scope,
                const std::set<std::string>& known) {
    for (const auto& [key, _] : obj.items())
        if (!known.count(key)) bad_key(scope + key, "unknown key");
}

ServiceSpec parse_service(const json& j, const std::string& scope) {
    check_keys(j, scope, {"name", "periodic", "period", "gap_min", "gap_max",
                          "op_time", "threads_per_request", "payload_bytes",
                          "header_bytes"});
    if (!j.contains("name") || !j.at("name").is_string())
        bad_key(scope + "name", "required string");
    ServiceSpec s;
    s.name = j.at("name").get<std::string>();
    if (j.contains("periodic")) {
        if (!j.at("periodic").is_boolean()) bad_key(scope + "periodic", "expected a boolean");
        s.periodic = j.at("periodic").get<bool>();
    }
    s.period_s = get_num(j, scope, "period", s.period_s);
    s.gap_min_s = get_num(j, scope, "gap_min", s.gap_min_s);
    s.gap_max_s = get_num(j, scope, "gap_max", s.gap_max_s);
    s.op_time_s = get_num(j, scope, "op_time", s.op_time_s);
    s.threads_per_request =
        static_cast<int>(get_int(j, scope, "threads_per_request", s.threads_per_request));
    s.payload_bytes =
        static_cast<std::uint64_t>(get_int(j, scope, "payload_bytes",
                                           static_cast<std::int64_t>(s.payload_bytes)));
    s.header_bytes =
        static_cast<std::uint64_t>(get_int(j, scope, "header_bytes",
                                           static_cast<std::int64_t>(s.header_bytes)));
    return s;
}

}  // namespace

void RunConfig::validate() const {
    if (!map_file) {
        if (synthetic.width <= 0.0 || synthetic.height <= 0.0)
            bad_key("map.synthetic", "width and height must be positive");
        if (synthetic.n_entries < 1) bad_key("map.synthetic.entries", "need at least one");
        if (synthetic.n_areas < 1) bad_key("map.synthetic.areas", "need at least one");
        if (synthetic.n_hospitals < 0) bad_key("map.synthetic.hospitals", "must be >= 0");
    }
    mobility.validate();
    if (grid_resolution < 1) bad_key("placement.resolution", "must be >= 1");
    if (grid_window <= 0.0) bad_key("placement.window", "must be positive");
    if (n_aps < 1) bad_key("placement.aps", "must be >= 1");
    if (n_mdcs < 1) bad_key("placement.mdcs", "must be >= 1");
    if (scenarios.empty()) bad_key("scenarios", "must list at least one scenario");
    if (services.empty() || services.size() > 8)
        bad_key("services", "between 1 and 8 services");
    if (mdc.pus < 1 || mdc.threads_per_pu < 1)
        bad_key("mdc", "pus and threads_per_pu must be >= 1");
    if (power.active_w < power.idle_w) bad_key("power", "active_w must be >= idle_w");
    if (sim.duration_s <= 0.0) bad_key("sim.duration", "must be positive");
    if (sim.sample_interval_s <= 0.0) bad_key("sim.sample_interval", "must be positive");
    if (sim.retry_interval_s <= 0.0) bad_key("sim.retry_interval", "must be positive");
    if (warmup_s < 0.0) bad_key("warmup", "must be >= 0");
    if (warmup_s >= sim.duration_s) bad_key("warmup", "must be shorter than sim.duration");
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path.string());
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ConfigError("config file " + path.string() + ": " + e.what());
    }
    check_keys(j, "", {"map", "mobility", "placement", "scenarios", "services", "mdc",
                       "power", "sim", "seed", "warmup", "out_dir"});
    RunConfig cfg;
    if (j.contains("map")) {
        const json& m = j.at("map");
        check_keys(m, "map.", {"file", "synthetic"});
        if (m.contains("file")) {
            if (!m.at("file").is_string()) bad_key("map.file", "expected a path string");
            std::filesystem::path p = m.at("file").get<std::string>();
            if (p.is_relative()) p = path.parent_path() / p;
            cfg.map_file = p;
        } else if (m.contains("synthetic")) {
            const json& s = m.at("synthetic");
            check_keys(s, "map.synthetic.", {"width", "height", "entries", "areas", "hospitals"});
            cfg.synthetic.width = get_num(s, "map.synthetic.", "width", cfg.synthetic.width);
            cfg.synthetic.height = get_num(s, "map.synthetic.", "height", cfg.synthetic.height);
            cfg.synthetic.n_entries =
                static_cast<int>(get_int(s, "map.synthetic.", "entries", cfg.synthetic.n_entries));
            cfg.synthetic.n_areas =
                static_cast<int>(get_int(s, "map.synthetic.", "areas", cfg.synthetic.n_areas));
            cfg.synthetic.n_hospitals = static_cast<int>(
                get_int(s, "map.synthetic.", "hospitals", cfg.synthetic.n_hospitals));
        } else {
            bad_key("map", "needs either \"file\" or \"synthetic\"");
        }
    }
    if (j.contains("mobility")) {
        const json& m = j.at("mobility");
        check_keys(m, "mobility.", {"wave_period", "wave_size", "walk_speed", "dwell_min",
                                    "dwell_max", "duration", "sample_step"});
        cfg.mobility.wave_period = get_num(m, "mobility.", "wave_period", cfg.mobility.wave_period);
        cfg.mobility.wave_size =
            static_cast<int>(get_int(m, "mobility.", "wave_size", cfg.mobility.wave_size));
        cfg.mobility.walk_speed = get_num(m, "mobility.", "walk_speed", cfg.mobility.walk_speed);
        cfg.mobility.dwell_min = get_num(m, "mobility.", "dwell_min", cfg.mobility.dwell_min);
        cfg.mobility.dwell_max = get_num(m, "mobility.", "dwell_max", cfg.mobility.dwell_max);
        cfg.mobility.duration = get_num(m, "mobility.", "duration", cfg.mobility.duration);
        cfg.mobility.sample_step = get_num(m, "mobility.", "sample_step", cfg.mobility.sample_step);
    }
    if (j.contains("placement")) {
        const json& p = j.at("placement");
        check_keys(p, "placement.", {"resolution", "window", "aps", "mdcs"});
        cfg.grid_resolution =
            static_cast<int>(get_int(p, "placement.", "resolution", cfg.grid_resolution));
        cfg.grid_window = get_num(p, "placement.", "window", cfg.grid_window);
        cfg.n_aps = static_cast<std::size_t>(
            get_int(p, "placement.", "aps", static_cast<std::int64_t>(cfg.n_aps)));
        cfg.n_mdcs = static_cast<std::size_t>(
            get_int(p, "placement.", "mdcs", static_cast<std::int64_t>(cfg.n_mdcs)));
    }
    if (j.contains("scenarios")) {
        if (!j.at("scenarios").is_array()) bad_key("scenarios", "expected an array of tags");
        cfg.scenarios.clear();
        for (const json& s : j.at("scenarios")) {
            if (!s.is_string()) bad_key("scenarios", "tags must be strings");
            try {
                cfg.scenarios.push_back(scenario_tag_from_string(s.get<std::string>()));
            } catch (const std::exception& e) {
                bad_key("scenarios", e.what());
            }
        }
    }
    if (j.contains("services")) {
        if (!j.at("services").is_array()) bad_key("services", "expected an array");
        cfg.services.clear();
        std::size_t i = 0;
        for (const json& s : j.at("services"))
            cfg.services.push_back(parse_service(s, "services[" + std::to_string(i++) + "]."));
    }
    if (j.contains("mdc")) {
        const json& m = j.at("mdc");
        check_keys(m, "mdc.", {"pus", "threads_per_pu"});
        cfg.mdc.pus = static_cast<int>(get_int(m, "mdc.", "pus", cfg.mdc.pus));
        cfg.mdc.threads_per_pu =
            static_cast<int>(get_int(m, "mdc.", "threads_per_pu", cfg.mdc.threads_per_pu));
    }
    if (j.contains("power")) {
        const json& p = j.at("power");
        check_keys(p, "power.", {"idle_w", "active_w"});
        cfg.power.idle_w = get_num(p, "power.", "idle_w", cfg.power.idle_w);
        cfg.power.active_w = get_num(p, "power.", "active_w", cfg.power.active_w);
    }
    if (j.contains("sim")) {
        const json& s = j.at("sim");
        check_keys(s, "sim.", {"duration", "sample_interval", "retry_interval", "keep_log"});
        cfg.sim.duration_s = get_num(s, "sim.", "duration", cfg.sim.duration_s);
        cfg.sim.sample_interval_s =
            get_num(s, "sim.", "sample_interval", cfg.sim.sample_interval_s);
        cfg.sim.retry_interval_s = get_num(s, "sim.", "retry_interval", cfg.sim.retry_interval_s);
        if (s.contains("keep_log")) {
            if (!s.at("keep_log").is_boolean()) bad_key("sim.keep_log", "expected a boolean");
            cfg.sim.keep_log = s.at("keep_log").get<bool>();
        }
    }
    cfg.sim.seed = static_cast<std::uint64_t>(
        get_int(j, "", "seed", static_cast<std::int64_t>(cfg.sim.seed)));
    cfg.warmup_s = get_num(j, "", "warmup", cfg.warmup_s);
    if (j.contains("out_dir")) {
        if (!j.at("out_dir").is_string()) bad_key("out_dir", "expected a path string");
        cfg.out_dir = j.at("out_dir").get<std::string>();
    }
    cfg.validate();
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    if (cfg.map_file) {
        j["map"]["file"] = cfg.map_file->string();
    } else {
        j["map"]["synthetic"] = {{"width", cfg.synthetic.width},
                                 {"height", cfg.synthetic.height},
                                 {"entries", cfg.synthetic.n_entries},
                                 {"areas", cfg.synthetic.n_areas},
                                 {"hospitals", cfg.synthetic.n_hospitals}};
    }
    j["mobility"] = {{"wave_period", cfg.mobility.wave_period},
                     {"wave_size", cfg.mobility.wave_size},
                     {"walk_speed", cfg.mobility.walk_speed},
                     {"dwell_min", cfg.mobility.dwell_min},
                     {"dwell_max", cfg.mobility.dwell_max},
                     {"duration", cfg.mobility.duration},
                     {"sample_step", cfg.mobility.sample_step}};
    j["placement"] = {{"resolution", cfg.grid_resolution},
                      {"window", cfg.grid_window},
                      {"aps", cfg.n_aps},
                      {"mdcs", cfg.n_mdcs}};
    j["scenarios"] = json::array();
    for (ScenarioTag tag : cfg.scenarios) j["scenarios"].push_back(to_string(tag));
    j["services"] = json::array();
    for (const ServiceSpec& s : cfg.services)
        j["services"].push_back({{"name", s.name},
                                 {"periodic", s.periodic},
                                 {"period", s.period_s},
                                 {"gap_min", s.gap_min_s},
                                 {"gap_max", s.gap_max_s},
                                 {"op_time", s.op_time_s},
                                 {"threads_per_request", s.threads_per_request},
                                 {"payload_bytes", s.payload_bytes},
                                 {"header_bytes", s.header_bytes}});
    j["mdc"] = {{"pus", cfg.mdc.pus}, {"threads_per_pu", cfg.mdc.threads_per_pu}};
    j["power"] = {{"idle_w", cfg.power.idle_w}, {"active_w", cfg.power.active_w}};
    j["sim"] = {{"duration", cfg.sim.duration_s},
                {"sample_interval", cfg.sim.sample_interval_s},
                {"retry_interval", cfg.sim.retry_interval_s},
                {"keep_log", cfg.sim.keep_log}};
    j["seed"] = cfg.sim.seed;
    j["warmup"] = cfg.warmup_s;
    j["out_dir"] = cfg.out_dir.string();
    return j.dump(2) + "\n";
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot hash missing file: " + path.string());
    std::uint64_t h = 14695981039346656037ull;
    char buf[1 << 16];
    while (f.read(buf, sizeof(buf)) || f.gcount() > 0) {
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!f) break;
    }
    return h;
}

void write_run_manifest(const RunConfig& cfg,
                        const std::vector<std::filesystem::path>& inputs,
                        const std::filesystem::path& path) {
    json j;
    j["config"] = json::parse(run_config_to_json(cfg));
    // The output location has no bearing on results; dropping it keeps
    // manifests byte-identical across re-runs into different directories.
    j["config"].erase("out_dir");
    j["seed"] = cfg.sim.seed;
    for (const auto& in : inputs) {
        char h[32];
        std::snprintf(h, sizeof(h), "%016llx",
                      static_cast<unsigned long long>(hash_file(in)));
        j["input_hashes"][in.filename().string()] = h;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write manifest: " + path.string());
    f << j.dump(2) << '\n';
}

}  // namespace mdcsim
