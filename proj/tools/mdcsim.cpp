// Pipeline front end: map generation, mobility traces, AP/MDC placement,
// event-driven simulation, and report rendering, each runnable standalone
// or end to end. One JSON config file drives every stage; flags override
// individual keys. MDCSIM_LOG=debug|info|quiet sets stderr verbosity.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mdcsim/config.hpp"
#include "mdcsim/geometry.hpp"
#include "mdcsim/kernels.hpp"
#include "mdcsim/metrics.hpp"
#include "mdcsim/mobility.hpp"
#include "mdcsim/placement.hpp"
#include "mdcsim/topology.hpp"

namespace fs = std::filesystem;
using namespace mdcsim;

namespace {

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
    static const LogLevel level = [] {
        const char* env = std::getenv("MDCSIM_LOG");
        if (!env) return LogLevel::Info;
        const std::string v = env;
        if (v == "quiet") return LogLevel::Quiet;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return level;
}

void info(const std::string& msg) {
    if (log_level() >= LogLevel::Info) std::cerr << "[mdcsim] " << msg << "\n";
}

void debug(const std::string& msg) {
    if (log_level() >= LogLevel::Debug) std::cerr << "[mdcsim:debug] " << msg << "\n";
}

struct CommonFlags {
    std::string config_path;
    std::string out_override;
    std::string scenario_override;
    std::int64_t seed_override = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON run configuration")->required();
    cmd->add_option("--out", flags.out_override, "override out_dir from the config");
    cmd->add_option("--seed", flags.seed_override, "override seed from the config");
    cmd->add_option("--scenario", flags.scenario_override,
                    "run only this scenario tag (C3|H1|H3|H9)");
}

RunConfig load_with_overrides(const CommonFlags& flags) {
    RunConfig cfg = load_run_config(flags.config_path);
    if (!flags.out_override.empty()) cfg.out_dir = flags.out_override;
    if (flags.seed_override >= 0) cfg.sim.seed = static_cast<std::uint64_t>(flags.seed_override);
    if (!flags.scenario_override.empty())
        cfg.scenarios = {scenario_tag_from_string(flags.scenario_override)};
    cfg.validate();
    fs::create_directories(cfg.out_dir);
    return cfg;
}

fs::path map_path(const RunConfig& cfg) { return cfg.out_dir / "map.json"; }
fs::path trace_path(const RunConfig& cfg) { return cfg.out_dir / "trace.csv"; }
fs::path grid_path(const RunConfig& cfg) { return cfg.out_dir / "grid.csv"; }
fs::path placement_path(const RunConfig& cfg, ScenarioTag tag) {
    return cfg.out_dir / ("placement_" + to_string(tag) + ".json");
}
fs::path raw_path(const RunConfig& cfg, ScenarioTag tag) {
    return cfg.out_dir / ("raw_" + to_string(tag) + ".csv");
}
fs::path events_path(const RunConfig& cfg, ScenarioTag tag) {
    return cfg.out_dir / ("events_" + to_string(tag) + ".csv");
}

ScenarioMap stage_map(const RunConfig& cfg) {
    ScenarioMap map;
    if (cfg.map_file) {
        info("loading map " + cfg.map_file->string());
        map = load_map(*cfg.map_file);
    } else {
        info("generating synthetic map");
        map = generate_synthetic_map(cfg.synthetic.width, cfg.synthetic.height,
                                     cfg.synthetic.n_entries, cfg.synthetic.n_areas,
                                     cfg.synthetic.n_hospitals, cfg.sim.seed);
    }
    write_map(map, map_path(cfg));
    info("wrote " + map_path(cfg).string());
    return map;
}

ScenarioMap require_map(const RunConfig& cfg) {
    const fs::path p = map_path(cfg);
    if (!fs::exists(p))
        throw std::runtime_error("stage input missing: " + p.string() + " (run gen-map first)");
    return load_map(p);
}

MobilityTrace stage_trace(const RunConfig& cfg, const ScenarioMap& map) {
    info("generating mobility trace");
    MobilityTrace trace = generate_trace(map, cfg.mobility, cfg.sim.seed);
    write_trace(trace, trace_path(cfg));
    info("wrote " + trace_path(cfg).string() + " (" +
         std::to_string(trace.itineraries.size()) + " agents)");
    return trace;
}

MobilityTrace require_trace(const RunConfig& cfg) {
    const fs::path p = trace_path(cfg);
    if (!fs::exists(p))
        throw std::runtime_error("stage input missing: " + p.string() +
                                 " (run gen-trace first)");
    return read_trace(p);
}

void stage_place(const RunConfig& cfg, const ScenarioMap& map, const MobilityTrace& trace) {
    info("building presence grid and placements");
    const PresenceGrid grid =
        build_presence_grid(trace, map.bounds, cfg.grid_resolution, cfg.grid_window);
    write_grid_csv(grid, grid_path(cfg));
    const Placement base = place(grid, cfg.n_aps, cfg.n_mdcs, cfg.sim.seed);
    for (ScenarioTag tag : cfg.scenarios) {
        const Placement p = tag == ScenarioTag::C3 ? base : derive_scenario(base, map, tag);
        write_placement(p, placement_path(cfg, tag));
        info("wrote " + placement_path(cfg, tag).string() + " (" +
             std::to_string(p.mdcs.size()) + " MDCs)");
    }
}

Placement require_placement(const RunConfig& cfg, ScenarioTag tag) {
    const fs::path p = placement_path(cfg, tag);
    if (!fs::exists(p))
        throw std::runtime_error("stage input missing: " + p.string() + " (run place first)");
    return load_placement(p);
}

void stage_simulate(const RunConfig& cfg, const MobilityTrace& trace) {
    for (ScenarioTag tag : cfg.scenarios) {
        info("simulating scenario " + to_string(tag));
        const Topology topo(require_placement(cfg, tag));
        RawResults raw =
            run_simulation(trace, topo, cfg.services, cfg.mdc, cfg.power, cfg.sim);
        raw.scenario = to_string(tag);
        write_raw_csv(raw, raw_path(cfg, tag));
        if (cfg.sim.keep_log) write_event_log_csv(raw, events_path(cfg, tag));
        debug("log hash " + std::to_string(raw.log_hash));
        info("wrote " + raw_path(cfg, tag).string());
    }
    std::vector<fs::path> inputs = {map_path(cfg), trace_path(cfg)};
    for (ScenarioTag tag : cfg.scenarios) inputs.push_back(placement_path(cfg, tag));
    write_run_manifest(cfg, inputs, cfg.out_dir / "manifest.json");
    info("wrote " + (cfg.out_dir / "manifest.json").string());
}

void stage_report(const RunConfig& cfg, const MobilityTrace& trace) {
    SimulationReport report;
    for (ScenarioTag tag : cfg.scenarios) {
        const fs::path p = raw_path(cfg, tag);
        if (!fs::exists(p))
            throw std::runtime_error("stage input missing: " + p.string() +
                                     " (run simulate first)");
        const RawResults raw = read_raw_csv(p, to_string(tag), cfg.mdc, cfg.power,
                                            cfg.sim.duration_s, cfg.sim.sample_interval_s);
        report.scenarios.push_back(build_scenario_report(raw, trace, cfg.warmup_s));
    }
    render_report(report, cfg.out_dir / "report");
    info("wrote report tree under " + (cfg.out_dir / "report").string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"micro-data-center deployment simulator"};
    app.require_subcommand(1);

    CommonFlags fl_map, fl_trace, fl_place, fl_sim, fl_report, fl_pipe;
    add_common(app.add_subcommand("gen-map", "generate or import the scenario map"), fl_map);
    add_common(app.add_subcommand("gen-trace", "generate the mobility trace"), fl_trace);
    add_common(app.add_subcommand("place", "build presence grid and AP/MDC placements"),
               fl_place);
    add_common(app.add_subcommand("simulate", "run the event-driven simulation"), fl_sim);
    add_common(app.add_subcommand("report", "render CSV/SVG reports from raw results"),
               fl_report);
    add_common(app.add_subcommand("pipeline", "run every stage end to end"), fl_pipe);

    CLI11_PARSE(app, argc, argv);

    try {
        debug(std::string("compute backend: ") + kernels::active_backend());
        if (app.got_subcommand("gen-map")) {
            stage_map(load_with_overrides(fl_map));
        } else if (app.got_subcommand("gen-trace")) {
            const RunConfig cfg = load_with_overrides(fl_trace);
            stage_trace(cfg, require_map(cfg));
        } else if (app.got_subcommand("place")) {
            const RunConfig cfg = load_with_overrides(fl_place);
            stage_place(cfg, require_map(cfg), require_trace(cfg));
        } else if (app.got_subcommand("simulate")) {
            const RunConfig cfg = load_with_overrides(fl_sim);
            stage_simulate(cfg, require_trace(cfg));
        } else if (app.got_subcommand("report")) {
            const RunConfig cfg = load_with_overrides(fl_report);
            stage_report(cfg, require_trace(cfg));
        } else if (app.got_subcommand("pipeline")) {
            const RunConfig cfg = load_with_overrides(fl_pipe);
            const ScenarioMap map = stage_map(cfg);
            const MobilityTrace trace = stage_trace(cfg, map);
            stage_place(cfg, map, trace);
            stage_simulate(cfg, trace);
            stage_report(cfg, trace);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
