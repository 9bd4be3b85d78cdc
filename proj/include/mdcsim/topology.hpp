#ifndef MDCSIM_TOPOLOGY_HPP
#define MDCSIM_TOPOLOGY_HPP

#include <cstdint>
#include <vector>

#include "mdcsim/mobility.hpp"
#include "mdcsim/placement.hpp"

namespace mdcsim {

struct HandoverEvent {
    double t = 0.0;
    std::uint32_t old_mdc = 0;
    std::uint32_t new_mdc = 0;
    bool operator==(const HandoverEvent&) const = default;
};

/// Resolves serving AP/MDC for positions and derives per-agent handover
/// schedules at trace sampling granularity.
class Topology {
  public:
    explicit Topology(Placement placement);

    std::uint32_t serving_mdc(GeoPoint p) const;

    /// Serving-MDC changes along the sampled path; evaluated at t_enter and
    /// every global sample time in (t_enter, t_exit].
    std::vector<HandoverEvent> handover_schedule(const AgentItinerary& it,
                                                 double sample_step) const;

    const Placement& placement() const { return placement_; }

  private:
    Placement placement_;
    std::vector<double> ap_xs_, ap_ys_;  // SoA mirror for the scan kernel
};

/// Free-function form: nearest AP, then that AP's mapped MDC.
std::uint32_t serving_mdc(GeoPoint p, const Placement& placement);

}  // namespace mdcsim

#endif
