#include "mdcsim/topology.hpp"

#include <cmath>

#include "mdcsim/kernels.hpp"

namespace mdcsim {

Topology::Topology(Placement placement) : placement_(std::move(placement)) {
    if (placement_.aps.empty() || placement_.mdcs.empty())
        throw InvalidParameterError("topology requires at least one AP and one MDC");
    if (placement_.ap_to_mdc.size() != placement_.aps.size())
        throw InvalidParameterError("topology: ap_to_mdc size mismatch");
    ap_xs_.reserve(placement_.aps.size());
    ap_ys_.reserve(placement_.aps.size());
    for (const GeoPoint ap : placement_.aps) {
        ap_xs_.push_back(ap.x);
        ap_ys_.push_back(ap.y);
    }
}

std::uint32_t Topology::serving_mdc(GeoPoint p) const {
    const std::size_t ap = kernels::nearest_point(p.x, p.y, ap_xs_.data(), ap_ys_.data(),
                                                  ap_xs_.size());
    return placement_.ap_to_mdc[ap];
}

std::vector<HandoverEvent> Topology::handover_schedule(const AgentItinerary& it,
                                                       double sample_step) const {
    std::vector<HandoverEvent> events;
    std::uint32_t cur = serving_mdc(it.entry);
    const auto k_start = static_cast<std::int64_t>(std::ceil(it.t_enter / sample_step - 1e-9));
    const auto k_end = static_cast<std::int64_t>(std::floor(it.t_exit / sample_step + 1e-9));
    for (std::int64_t k = k_start; k <= k_end; ++k) {
        const double t = static_cast<double>(k) * sample_step;
        if (t <= it.t_enter) continue;
        const auto pos = position_at(it, t);
        if (!pos) continue;
        const std::uint32_t next = serving_mdc(*pos);
        if (next != cur) {
            events.push_back({t, cur, next});
            cur = next;
        }
    }
    return events;
}

std::uint32_t serving_mdc(GeoPoint p, const Placement& placement) {
    return placement.ap_to_mdc[nearest_index(p, placement.aps)];
}

}  // namespace mdcsim
