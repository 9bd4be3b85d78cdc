#ifndef MDCSIM_METRICS_HPP
#define MDCSIM_METRICS_HPP

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mdcsim/edgesim.hpp"

namespace mdcsim {

struct EnvelopePoint {
    double t = 0.0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct TaskShare {
    double request_pct = 0.0;        ///< share of served requests
    double thread_seconds_pct = 0.0; ///< secondary: share of busy time
};

struct MdcPower {
    double mean_w = 0.0;     ///< warmed-up time-weighted mean
    double idle_w = 0.0;     ///< fixed infrastructure floor
    double dynamic_w = 0.0;  ///< mean_w - idle_w
    double energy_wh = 0.0;  ///< full-run energy
};

struct PowerSummary {
    std::vector<MdcPower> per_mdc;
    MdcPower total;
    double warmup_s = 0.0;
};

struct ScenarioReport {
    std::string tag;
    std::vector<EnvelopePoint> utilization;       ///< reservation-based
    std::vector<EnvelopePoint> busy_utilization;  ///< busy-thread based
    std::vector<std::pair<double, std::size_t>> live_agents;  ///< (t, count)
    std::vector<std::vector<std::pair<double, std::uint64_t>>> rejections;  ///< per MDC
    std::vector<TaskShare> shares;
    PowerSummary power;
};

struct SimulationReport {
    std::vector<ScenarioReport> scenarios;
};

/// Pointwise mean/min/max of the per-MDC reservation-utilization series.
std::vector<EnvelopePoint> utilization_envelope(const RawResults& raw);

/// Served-request share per MDC, in percent; thread-second shares as a
/// secondary column. Throws when nothing was served.
std::vector<TaskShare> task_shares(const RawResults& raw);

/// Time-weighted mean power per MDC over t >= warmup, split into the fixed
/// idle floor and the dynamic remainder; energy integrates the full run.
PowerSummary power_summary(const RawResults& raw, double warmup_s);

ScenarioReport build_scenario_report(const RawResults& raw, const MobilityTrace& trace,
                                     double warmup_s);

/// Writes report/<tag>/{utilization,rejections,shares,power}.csv plus SVG
/// charts and a cross-scenario summary.json.
void render_report(const SimulationReport& report, const std::filesystem::path& out_dir);

}  // namespace mdcsim

#endif
