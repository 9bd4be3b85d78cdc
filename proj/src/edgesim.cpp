#include "mdcsim/edgesim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "mdcsim/rng.hpp"

namespace mdcsim {

ServiceSpec inference_service() {
    ServiceSpec s;
    s.name = "inference";
    s.periodic = true;
    s.period_s = 60.0;
    s.op_time_s = 1.17;
    s.payload_bytes = 65;
    s.header_bytes = 54;
    return s;
}

ServiceSpec training_service() {
    ServiceSpec s;
    s.name = "training";
    s.periodic = false;
    s.gap_min_s = 1.0;
    s.gap_max_s = 86400.0;
    s.op_time_s = 18.0;
    s.payload_bytes = 20;
    s.header_bytes = 54;
    return s;
}

std::vector<ServiceSpec> default_services() {
    return {inference_service(), training_service()};
}

double training_gap(std::uint64_t seed, std::int64_t agent_id, std::uint64_t k,
                    const ServiceSpec& spec) {
    const double g = rng::draw_uniform(rng::derive(seed, {30, static_cast<std::uint64_t>(agent_id)}),
                                       k, spec.gap_min_s, spec.gap_max_s);
    return std::round(g * 1000.0) / 1000.0;
}

double pu_power(const ProcessingUnit& pu, const PowerModel& pm) {
    return pu.busy_ops > 0 ? pm.active_w : pm.idle_w;
}

Mdc::Mdc(std::uint32_t id, MdcConfig cfg, PowerModel pm)
    : id_(id), cfg_(cfg), pm_(pm), pus_(cfg.pus) {}

Mdc::OpenResult Mdc::open_session(std::int64_t agent_id, int service, Micros now) {
    const auto key = std::make_pair(agent_id, service);
    if (sessions_.count(key))
        throw DuplicateSessionError("agent " + std::to_string(agent_id) +
                                    " already has an open session for service " +
                                    std::to_string(service) + " at MDC " + std::to_string(id_));
    for (int p = 0; p < cfg_.pus; ++p) {
        if (static_cast<int>(pus_[p].reserved.size()) < cfg_.threads_per_pu) {
            Session s;
            s.id = (static_cast<std::uint64_t>(id_) << 40) | ++next_session_;
            s.agent_id = agent_id;
            s.service = service;
            s.mdc = id_;
            s.pu = p;
            s.opened_t = now;
            pus_[p].reserved.push_back(s.id);
            ++reserved_threads_;
            sessions_.emplace(key, s);
            return {true, s};
        }
    }
    ++rejections_;
    return {};
}

Session Mdc::close_session(std::int64_t agent_id, int service) {
    const auto it = sessions_.find({agent_id, service});
    if (it == sessions_.end())
        throw std::logic_error("close_session: no open session for agent " +
                               std::to_string(agent_id));
    const Session s = it->second;
    auto& reserved = pus_[s.pu].reserved;
    reserved.erase(std::find(reserved.begin(), reserved.end(), s.id));
    --reserved_threads_;
    sessions_.erase(it);
    return s;
}

bool Mdc::has_session(std::int64_t agent_id, int service) const {
    return sessions_.count({agent_id, service}) > 0;
}

void Mdc::flush_integrals(Micros now) {
    const auto dt = static_cast<double>(now - last_change_);
    busy_pu_micros_ += static_cast<double>(busy_pus_) * dt;
    busy_thread_micros_ += static_cast<double>(busy_threads_) * dt;
    last_change_ = now;
}

void Mdc::op_started(int pu, Micros now) {
    flush_integrals(now);
    ++busy_threads_;
    if (pus_[pu].busy_ops++ == 0) ++busy_pus_;
}

void Mdc::op_finished(int pu, Micros now) {
    flush_integrals(now);
    --busy_threads_;
    if (--pus_[pu].busy_ops == 0) --busy_pus_;
}

void Mdc::add_served(int service) { ++served_[service]; }

void Mdc::add_traffic(std::uint64_t bytes) {
    traffic_bytes_ += bytes;
    ++messages_;
}

double Mdc::power_w() const {
    return pm_.idle_w * cfg_.pus + (pm_.active_w - pm_.idle_w) * busy_pus_;
}

double Mdc::take_busy_pu_seconds(Micros now) {
    flush_integrals(now);
    const double s = busy_pu_micros_ * 1e-6;
    busy_pu_micros_ = 0.0;
    return s;
}

double Mdc::take_busy_thread_seconds(Micros now) {
    flush_integrals(now);
    const double s = busy_thread_micros_ * 1e-6;
    busy_thread_micros_ = 0.0;
    return s;
}

const char* to_string(LogKind kind) {
    switch (kind) {
        case LogKind::SessionOpen: return "SessionOpen";
        case LogKind::SessionClose: return "SessionClose";
        case LogKind::SessionReject: return "SessionReject";
        case LogKind::OpStart: return "OpStart";
        case LogKind::OpFinish: return "OpFinish";
        case LogKind::OpCancel: return "OpCancel";
    }
    return "?";
}

namespace {

struct SimSession {
    std::int64_t agent_id = -1;
    int service = 0;
    std::uint32_t mdc = 0;
    int pu = -1;
    bool open = false;
    std::uint64_t inflight_op = 0;
};

struct SimOp {
    std::uint64_t session = 0;
    std::uint32_t mdc = 0;
    int pu = -1;
    int service = 0;
    bool cancelled = false;
};

struct AgentRt {
    bool present = false;
    std::uint32_t cur_mdc = 0;
    Micros t_exit = 0;  ///< truncated at the run horizon
    std::vector<std::uint64_t> open_session;  ///< per service, 0 = none
    std::vector<std::uint64_t> gap_counter;   ///< per service draw counters
};

class Simulator {
  public:
    Simulator(const MobilityTrace& trace, const Topology& topo,
              const std::vector<ServiceSpec>& services, MdcConfig mdc_cfg, PowerModel pm,
              const SimParams& params)
        : trace_(trace), topo_(topo), services_(services), params_(params) {
        const std::size_t n = topo.placement().mdcs.size();
        mdcs_.reserve(n);
        for (std::size_t m = 0; m < n; ++m)
            mdcs_.emplace_back(static_cast<std::uint32_t>(m), mdc_cfg, pm);
        raw_.scenario = to_string(topo.placement().tag);
        raw_.mdc_config = mdc_cfg;
        raw_.power_model = pm;
        raw_.duration_s = params.duration_s;
        raw_.sample_interval_s = params.sample_interval_s;
        raw_.series.resize(n);
    }

    RawResults run() {
        const Micros horizon = engine::to_micros(params_.duration_s);
        const Micros interval = engine::to_micros(params_.sample_interval_s);

        // Samples first: at an equal timestamp the FIFO tie-break then makes
        // each sample observe the state before that instant's transitions.
        for (Micros t = 0; t <= horizon; t += interval)
            q_.schedule({t, 0, engine::EventKind::MetricSample});

        for (const AgentItinerary& it : trace_.itineraries) {
            const Micros t_enter = engine::to_micros(it.t_enter);
            if (t_enter > horizon) continue;
            const Micros t_exit = std::min(engine::to_micros(it.t_exit), horizon);
            AgentRt rt;
            rt.t_exit = t_exit;
            rt.open_session.assign(services_.size(), 0);
            rt.gap_counter.assign(services_.size(), 0);
            agents_.emplace(it.agent_id, rt);

            engine::Event enter{t_enter, 0, engine::EventKind::AgentEnter};
            enter.agent_id = it.agent_id;
            enter.mdc = topo_.serving_mdc(it.entry);
            q_.schedule(enter);
            for (const HandoverEvent& h : topo_.handover_schedule(it, 1.0)) {
                const Micros t = engine::to_micros(h.t);
                if (t >= t_exit) break;
                engine::Event e{t, 0, engine::EventKind::Handover};
                e.agent_id = it.agent_id;
                e.mdc = h.new_mdc;
                q_.schedule(e);
            }
            engine::Event exit{t_exit, 0, engine::EventKind::AgentExit};
            exit.agent_id = it.agent_id;
            q_.schedule(exit);
        }

        q_.run_until(horizon, [this](const engine::Event& e) { dispatch(e); });

        raw_.log_hash = hash_log();
        if (!params_.keep_log) raw_.log.clear();
        return std::move(raw_);
    }

  private:
    void dispatch(const engine::Event& e) {
        switch (e.kind) {
            case engine::EventKind::MetricSample: on_sample(e.t); break;
            case engine::EventKind::AgentEnter: on_enter(e); break;
            case engine::EventKind::AgentExit: on_exit(e); break;
            case engine::EventKind::Handover: on_handover(e); break;
            case engine::EventKind::SessionRequest: on_retry(e); break;
            case engine::EventKind::TaskStart: on_task_start(e); break;
            case engine::EventKind::TaskFinish: on_task_finish(e); break;
        }
    }

    void log(Micros t, LogKind kind, std::int64_t agent, std::uint32_t mdc, int pu,
             int service, std::uint64_t ref) {
        raw_.log.push_back({t, kind, agent, mdc, pu, service, ref});
    }

    void try_open(std::int64_t agent, int service, Micros now) {
        AgentRt& rt = agents_.at(agent);
        auto& mdc = mdcs_[rt.cur_mdc];
        const auto r = mdc.open_session(agent, service, now);
        if (!r.accepted) {
            log(now, LogKind::SessionReject, agent, rt.cur_mdc, -1, service, 0);
            const Micros retry = now + engine::to_micros(params_.retry_interval_s);
            if (retry <= rt.t_exit) {
                engine::Event e{retry, 0, engine::EventKind::SessionRequest};
                e.agent_id = agent;
                e.service = static_cast<std::uint8_t>(service);
                q_.schedule(e);
            }
            return;
        }
        SimSession s;
        s.agent_id = agent;
        s.service = service;
        s.mdc = rt.cur_mdc;
        s.pu = r.session.pu;
        s.open = true;
        sessions_[r.session.id] = s;
        rt.open_session[service] = r.session.id;
        log(now, LogKind::SessionOpen, agent, rt.cur_mdc, r.session.pu, service, r.session.id);

        engine::Event start{now, 0, engine::EventKind::TaskStart};
        start.ref = r.session.id;
        if (!services_[service].periodic) {
            const double gap = training_gap(params_.seed, agent, rt.gap_counter[service]++,
                                            services_[service]);
            start.t = now + engine::to_micros(gap);
        }
        q_.schedule(start);
    }

    /// Closes an open session; cancel_inflight distinguishes agent exit
    /// (op cancelled, not served) from handover (op detaches and completes
    /// at the old MDC).
    void close_open_session(std::int64_t agent, int service, Micros now, bool cancel_inflight) {
        AgentRt& rt = agents_.at(agent);
        const std::uint64_t sid = rt.open_session[service];
        SimSession& s = sessions_.at(sid);
        mdcs_[s.mdc].close_session(agent, service);
        s.open = false;
        rt.open_session[service] = 0;
        log(now, LogKind::SessionClose, agent, s.mdc, s.pu, service, sid);
        if (cancel_inflight && s.inflight_op != 0) {
            SimOp& op = ops_.at(s.inflight_op);
            op.cancelled = true;
            mdcs_[op.mdc].op_finished(op.pu, now);
            log(now, LogKind::OpCancel, agent, op.mdc, op.pu, service, s.inflight_op);
        }
    }

    void on_enter(const engine::Event& e) {
        AgentRt& rt = agents_.at(e.agent_id);
        rt.present = true;
        rt.cur_mdc = e.mdc;
        for (std::size_t svc = 0; svc < services_.size(); ++svc)
            try_open(e.agent_id, static_cast<int>(svc), e.t);
    }

    void on_exit(const engine::Event& e) {
        AgentRt& rt = agents_.at(e.agent_id);
        rt.present = false;
        for (std::size_t svc = 0; svc < services_.size(); ++svc)
            if (rt.open_session[svc] != 0)
                close_open_session(e.agent_id, static_cast<int>(svc), e.t, /*cancel=*/true);
    }

    void on_handover(const engine::Event& e) {
        AgentRt& rt = agents_.at(e.agent_id);
        if (!rt.present) return;
        for (std::size_t svc = 0; svc < services_.size(); ++svc)
            if (rt.open_session[svc] != 0)
                close_open_session(e.agent_id, static_cast<int>(svc), e.t, /*cancel=*/false);
        rt.cur_mdc = e.mdc;
        for (std::size_t svc = 0; svc < services_.size(); ++svc)
            try_open(e.agent_id, static_cast<int>(svc), e.t);
    }

    void on_retry(const engine::Event& e) {
        const AgentRt& rt = agents_.at(e.agent_id);
        if (!rt.present || rt.open_session[e.service] != 0) return;
        try_open(e.agent_id, e.service, e.t);
    }

    void on_task_start(const engine::Event& e) {
        const auto sit = sessions_.find(e.ref);
        if (sit == sessions_.end() || !sit->second.open) return;  // session gone
        SimSession& s = sit->second;
        if (s.inflight_op != 0)
            throw std::logic_error("request overlap: session " + std::to_string(e.ref) +
                                   " received a request while busy");
        const ServiceSpec& spec = services_[s.service];
        SimOp op;
        op.session = e.ref;
        op.mdc = s.mdc;
        op.pu = s.pu;
        op.service = s.service;
        const std::uint64_t op_id = ++next_op_;
        ops_[op_id] = op;
        s.inflight_op = op_id;
        mdcs_[s.mdc].op_started(s.pu, e.t);
        mdcs_[s.mdc].add_traffic(spec.total_bytes());  // request
        log(e.t, LogKind::OpStart, s.agent_id, s.mdc, s.pu, s.service, op_id);

        engine::Event finish{e.t + engine::to_micros(spec.op_time_s), 0,
                             engine::EventKind::TaskFinish};
        finish.ref = op_id;
        q_.schedule(finish);
        if (spec.periodic) {
            engine::Event next{e.t + engine::to_micros(spec.period_s), 0,
                               engine::EventKind::TaskStart};
            next.ref = e.ref;
            q_.schedule(next);
        }
    }

    void on_task_finish(const engine::Event& e) {
        const auto oit = ops_.find(e.ref);
        if (oit == ops_.end()) return;
        const SimOp op = oit->second;
        ops_.erase(oit);
        if (op.cancelled) return;
        SimSession& s = sessions_.at(op.session);
        s.inflight_op = 0;
        auto& mdc = mdcs_[op.mdc];
        mdc.op_finished(op.pu, e.t);
        mdc.add_served(op.service);
        mdc.add_traffic(services_[op.service].total_bytes());  // response
        log(e.t, LogKind::OpFinish, s.agent_id, op.mdc, op.pu, op.service, e.ref);

        if (!services_[op.service].periodic && s.open) {
            AgentRt& rt = agents_.at(s.agent_id);
            const double gap = training_gap(params_.seed, s.agent_id,
                                            rt.gap_counter[op.service]++, services_[op.service]);
            engine::Event next{e.t + engine::to_micros(gap), 0, engine::EventKind::TaskStart};
            next.ref = op.session;
            q_.schedule(next);
        }
    }

    void on_sample(Micros t) {
        for (std::size_t m = 0; m < mdcs_.size(); ++m) {
            Mdc& mdc = mdcs_[m];
            MdcSample s;
            s.t = t;
            s.reserved_threads = mdc.reserved_threads();
            s.busy_threads = mdc.busy_threads();
            s.busy_pus = mdc.busy_pus();
            s.power_w = mdc.power_w();
            s.busy_pu_seconds = mdc.take_busy_pu_seconds(t);
            s.busy_thread_seconds = mdc.take_busy_thread_seconds(t);
            s.rejections_cum = mdc.rejections();
            s.served_inference_cum = mdc.served(0);
            s.served_training_cum = services_.size() > 1 ? mdc.served(1) : 0;
            s.traffic_bytes_cum = mdc.traffic_bytes();
            s.messages_cum = mdc.messages();
            raw_.series[m].push_back(s);
        }
    }

    std::uint64_t hash_log() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ULL;
        };
        for (const LogEntry& e : raw_.log) {
            mix(static_cast<std::uint64_t>(e.t));
            mix(static_cast<std::uint64_t>(e.kind));
            mix(static_cast<std::uint64_t>(e.agent_id));
            mix(e.mdc);
            mix(static_cast<std::uint64_t>(e.pu + 1));
            mix(static_cast<std::uint64_t>(e.service));
            mix(e.ref);
        }
        return h;
    }

    const MobilityTrace& trace_;
    const Topology& topo_;
    std::vector<ServiceSpec> services_;
    SimParams params_;
    std::vector<Mdc> mdcs_;
    engine::EventQueue q_;
    std::unordered_map<std::int64_t, AgentRt> agents_;
    std::unordered_map<std::uint64_t, SimSession> sessions_;
    std::unordered_map<std::uint64_t, SimOp> ops_;
    std::uint64_t next_op_ = 0;
    RawResults raw_;
};

}  // namespace

RawResults run_simulation(const MobilityTrace& trace, const Topology& topo,
                          const std::vector<ServiceSpec>& services,
                          MdcConfig mdc_cfg, PowerModel pm, const SimParams& params) {
    if (services.empty() || services.size() > 8)
        throw InvalidParameterError("run_simulation: between 1 and 8 services required");
    if (!(params.duration_s > 0.0) || !(params.sample_interval_s > 0.0) ||
        !(params.retry_interval_s > 0.0))
        throw InvalidParameterError("run_simulation: durations must be positive");
    Simulator sim(trace, topo, services, mdc_cfg, pm, params);
    return sim.run();
}

namespace {

void append_shortest(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

}  // namespace

void write_raw_csv(const RawResults& raw, const std::filesystem::path& path) {
    std::string out =
        "t,mdc_id,reserved_threads,busy_pus,power_w,rejections_cum,served_inference_cum,"
        "served_training_cum,traffic_bytes_cum,busy_threads,busy_pu_seconds,"
        "busy_thread_seconds,messages_cum\n";
    if (!raw.series.empty()) {
        const std::size_t n_samples = raw.series[0].size();
        for (std::size_t i = 0; i < n_samples; ++i) {
            for (std::size_t m = 0; m < raw.series.size(); ++m) {
                const MdcSample& s = raw.series[m][i];
                char head[64];
                std::snprintf(head, sizeof(head), "%.6f,%zu,", engine::to_seconds(s.t), m);
                out += head;
                out += std::to_string(s.reserved_threads);
                out += ',';
                out += std::to_string(s.busy_pus);
                out += ',';
                append_shortest(out, s.power_w);
                out += ',';
                out += std::to_string(s.rejections_cum);
                out += ',';
                out += std::to_string(s.served_inference_cum);
                out += ',';
                out += std::to_string(s.served_training_cum);
                out += ',';
                out += std::to_string(s.traffic_bytes_cum);
                out += ',';
                out += std::to_string(s.busy_threads);
                out += ',';
                append_shortest(out, s.busy_pu_seconds);
                out += ',';
                append_shortest(out, s.busy_thread_seconds);
                out += ',';
                out += std::to_string(s.messages_cum);
                out += '\n';
            }
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write raw results file: " + path.string());
    f << out;
}

RawResults read_raw_csv(const std::filesystem::path& path, const std::string& scenario,
                        MdcConfig mdc_cfg, PowerModel pm, double duration_s,
                        double sample_interval_s) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open raw results file: " + path.string());
    RawResults raw;
    raw.scenario = scenario;
    raw.mdc_config = mdc_cfg;
    raw.power_model = pm;
    raw.duration_s = duration_s;
    raw.sample_interval_s = sample_interval_s;
    std::string line;
    std::getline(f, line);  // header
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 13)
            throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                                     ": expected 13 fields");
        MdcSample s;
        s.t = engine::to_micros(std::stod(fields[0]));
        const auto m = static_cast<std::size_t>(std::stoul(fields[1]));
        s.reserved_threads = std::stoi(fields[2]);
        s.busy_pus = std::stoi(fields[3]);
        s.power_w = std::stod(fields[4]);
        s.rejections_cum = std::stoull(fields[5]);
        s.served_inference_cum = std::stoull(fields[6]);
        s.served_training_cum = std::stoull(fields[7]);
        s.traffic_bytes_cum = std::stoull(fields[8]);
        s.busy_threads = std::stoi(fields[9]);
        s.busy_pu_seconds = std::stod(fields[10]);
        s.busy_thread_seconds = std::stod(fields[11]);
        s.messages_cum = std::stoull(fields[12]);
        if (m >= raw.series.size()) raw.series.resize(m + 1);
        raw.series[m].push_back(s);
    }
    return raw;
}

void write_event_log_csv(const RawResults& raw, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write event log file: " + path.string());
    f << "t,kind,agent_id,mdc,pu,service,ref\n";
    char head[32];
    for (const LogEntry& e : raw.log) {
        std::snprintf(head, sizeof(head), "%.6f", engine::to_seconds(e.t));
        f << head << ',' << to_string(e.kind) << ',' << e.agent_id << ',' << e.mdc << ','
          << e.pu << ',' << e.service << ',' << e.ref << '\n';
    }
}

std::size_t first_fit_violations(const RawResults& raw) {
    const int per_pu = raw.mdc_config.threads_per_pu;
    std::map<std::pair<std::uint32_t, int>, int> reserved;
    std::size_t violations = 0;
    for (const LogEntry& e : raw.log) {
        if (e.kind == LogKind::SessionOpen) {
            for (int p = 0; p < e.pu; ++p)
                if (reserved[{e.mdc, p}] < per_pu) ++violations;
            ++reserved[{e.mdc, e.pu}];
        } else if (e.kind == LogKind::SessionClose) {
            --reserved[{e.mdc, e.pu}];
        }
    }
    return violations;
}

}  // namespace mdcsim
