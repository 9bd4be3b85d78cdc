#ifndef MDCSIM_ENGINE_HPP
#define MDCSIM_ENGINE_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdcsim::engine {

/// Simulation time as a 64-bit microsecond count; seconds at the edges.
using Micros = std::int64_t;

inline Micros to_micros(double seconds) {
    return static_cast<Micros>(std::llround(seconds * 1e6));
}
inline double to_seconds(Micros t) { return static_cast<double>(t) * 1e-6; }

enum class EventKind : std::uint8_t {
    AgentEnter,
    AgentExit,
    Handover,
    SessionRequest,
    TaskStart,
    TaskFinish,
    MetricSample,
};

const char* to_string(EventKind kind);

struct Event {
    Micros t = 0;
    std::uint64_t seq = 0;  ///< assigned by the queue at scheduling time
    EventKind kind = EventKind::MetricSample;
    std::int64_t agent_id = -1;
    std::uint32_t mdc = 0;
    std::uint8_t service = 0;
    std::uint64_t ref = 0;  ///< kind-specific id (session or op)
};

struct CausalityError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Time-ordered queue with stable FIFO tie-breaking at equal timestamps.
/// Strictly single-threaded; total dispatch order is a pure function of the
/// scheduled (t, seq) pairs.
class EventQueue {
  public:
    void schedule(Event e);
    std::optional<Event> pop_next();
    Micros now() const { return now_; }
    bool empty() const { return heap_.empty(); }

    /// Pops and dispatches events with t <= t_end; the handler may schedule
    /// further events. Handler exceptions abort with event context attached.
    void run_until(Micros t_end, const std::function<void(const Event&)>& handler);

  private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            return a.t != b.t ? a.t > b.t : a.seq > b.seq;
        }
    };
    std::priority_queue<Event, std::vector<Event>, Later> heap_;
    Micros now_ = 0;
    std::uint64_t next_seq_ = 0;
};

}  // namespace mdcsim::engine

#endif
