#include "mdcsim/engine.hpp"

namespace mdcsim::engine {

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::AgentEnter: return "AgentEnter";
        case EventKind::AgentExit: return "AgentExit";
        case EventKind::Handover: return "Handover";
        case EventKind::SessionRequest: return "SessionRequest";
        case EventKind::TaskStart: return "TaskStart";
        case EventKind::TaskFinish: return "TaskFinish";
        case EventKind::MetricSample: return "MetricSample";
    }
    return "?";
}

void EventQueue::schedule(Event e) {
    if (e.t < now_)
        throw CausalityError("schedule at t=" + std::to_string(to_seconds(e.t)) +
                             " before clock " + std::to_string(to_seconds(now_)));
    e.seq = next_seq_++;
    heap_.push(e);
}

std::optional<Event> EventQueue::pop_next() {
    if (heap_.empty()) return std::nullopt;
    Event e = heap_.top();
    heap_.pop();
    now_ = e.t;
    return e;
}

void EventQueue::run_until(Micros t_end, const std::function<void(const Event&)>& handler) {
    if (t_end < now_) throw CausalityError("run_until into the past");
    while (!heap_.empty() && heap_.top().t <= t_end) {
        const Event e = heap_.top();
        heap_.pop();
        now_ = e.t;
        try {
            handler(e);
        } catch (const std::exception& ex) {
            throw std::runtime_error(std::string("event handler failed at t=") +
                                     std::to_string(to_seconds(e.t)) + " kind=" +
                                     to_string(e.kind) + ": " + ex.what());
        }
    }
    if (t_end > now_) now_ = t_end;
}

}  // namespace mdcsim::engine
