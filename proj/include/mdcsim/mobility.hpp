#ifndef MDCSIM_MOBILITY_HPP
#define MDCSIM_MOBILITY_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "mdcsim/geometry.hpp"

namespace mdcsim {

struct MobilityConfig {
    double wave_period = 180.0;   ///< seconds between spawn waves
    int wave_size = 200;          ///< agents per wave
    double walk_speed = 1.4;      ///< m/s
    double dwell_min = 5.0;       ///< seconds at the destination
    double dwell_max = 30.0;
    double duration = 36000.0;    ///< virtual seconds
    double sample_step = 1.0;     ///< trace sampling interval

    void validate() const;
};

/// Enter at a metro stop, walk to a destination, dwell, leave via the
/// nearest stop. Times are quantized to 1 ms.
struct AgentItinerary {
    std::int64_t agent_id = 0;
    double t_enter = 0.0;
    GeoPoint entry;
    GeoPoint destination;
    double t_arrive = 0.0;
    double t_depart = 0.0;
    GeoPoint exit;
    double t_exit = 0.0;
    bool operator==(const AgentItinerary&) const = default;
};

struct TraceRecord {
    double t = 0.0;
    std::int64_t agent_id = 0;
    GeoPoint pos;
    bool operator==(const TraceRecord&) const = default;
};

struct MobilityTrace {
    std::vector<TraceRecord> records;        ///< sorted by (t, agent_id)
    std::vector<AgentItinerary> itineraries; ///< sorted by agent_id
    bool operator==(const MobilityTrace&) const = default;
};

struct TraceParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

MobilityTrace generate_trace(const ScenarioMap& map, const MobilityConfig& cfg,
                             std::uint64_t seed);

/// Position along the piecewise-linear itinerary; empty outside
/// [t_enter, t_exit]. The destination is held during the dwell.
std::optional<GeoPoint> position_at(const AgentItinerary& it, double t);

/// Records go to `path` (CSV t,agent_id,x,y); itineraries to the sibling
/// file returned by itinerary_path_for().
void write_trace(const MobilityTrace& trace, const std::filesystem::path& path);
MobilityTrace read_trace(const std::filesystem::path& path);
std::filesystem::path itinerary_path_for(const std::filesystem::path& trace_path);

/// Number of itineraries with t_enter <= t <= t_exit.
std::size_t live_agents_at(const MobilityTrace& trace, double t);

}  // namespace mdcsim

#endif
