#ifndef MDCSIM_EDGESIM_HPP
#define MDCSIM_EDGESIM_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdcsim/engine.hpp"
#include "mdcsim/mobility.hpp"
#include "mdcsim/topology.hpp"

namespace mdcsim {

using engine::Micros;

/// Per-service request statistics.
struct ServiceSpec {
    std::string name;
    bool periodic = true;     ///< fixed period from session open; else gap after completion
    double period_s = 60.0;
    double gap_min_s = 1.0;
    double gap_max_s = 86400.0;
    double op_time_s = 1.17;
    int threads_per_request = 1;
    std::uint64_t payload_bytes = 65;
    std::uint64_t header_bytes = 54;
    std::uint64_t total_bytes() const { return payload_bytes + header_bytes; }
};

ServiceSpec inference_service();
ServiceSpec training_service();
std::vector<ServiceSpec> default_services();

/// Training gap draw k for an agent: uniform [gap_min, gap_max], quantized
/// to 1 ms. Pure function of (seed, agent, k) so independent reference
/// implementations reproduce the exact same values.
double training_gap(std::uint64_t seed, std::int64_t agent_id, std::uint64_t k,
                    const ServiceSpec& spec);

struct PowerModel {
    double idle_w = 47.0;
    double active_w = 95.0;
};

struct MdcConfig {
    int pus = 10;
    int threads_per_pu = 16;
    int capacity() const { return pus * threads_per_pu; }
};

struct ProcessingUnit {
    std::vector<std::uint64_t> reserved;  ///< session ids holding a thread slot
    int busy_ops = 0;                     ///< currently executing operations
};

/// Idle/active power: a PU draws active_w while executing >= 1 op,
/// idle_w otherwise. A reservation alone does not make a PU active.
double pu_power(const ProcessingUnit& pu, const PowerModel& pm);

struct DuplicateSessionError : std::logic_error {
    using std::logic_error::logic_error;
};

struct Session {
    std::uint64_t id = 0;
    std::int64_t agent_id = -1;
    int service = 0;
    std::uint32_t mdc = 0;
    int pu = -1;
    Micros opened_t = 0;
};

/// One micro data center: first-fit thread reservation across PUs,
/// idle/active power accounting, and cumulative counters.
class Mdc {
  public:
    Mdc(std::uint32_t id, MdcConfig cfg, PowerModel pm);

    struct OpenResult {
        bool accepted = false;
        Session session;  ///< valid when accepted
    };

    /// First-fit: reserves one thread on the lowest-index PU with a free
    /// slot; all-full returns rejected and bumps the rejection counter.
    /// A second open for the same (agent, service) is a programming fault.
    OpenResult open_session(std::int64_t agent_id, int service, Micros now);
    /// Frees the session's thread slot. Throws if no such session.
    Session close_session(std::int64_t agent_id, int service);
    bool has_session(std::int64_t agent_id, int service) const;

    void op_started(int pu, Micros now);
    void op_finished(int pu, Micros now);
    void flush_integrals(Micros now);

    void add_served(int service);
    void add_traffic(std::uint64_t bytes);

    std::uint32_t id() const { return id_; }
    const MdcConfig& config() const { return cfg_; }
    const std::vector<ProcessingUnit>& pus() const { return pus_; }
    int reserved_threads() const { return reserved_threads_; }
    int busy_pus() const { return busy_pus_; }
    int open_sessions() const { return static_cast<int>(sessions_.size()); }
    /// Instantaneous MDC power: idle_w * pus + (active_w - idle_w) * busy PUs.
    double power_w() const;
    std::uint64_t rejections() const { return rejections_; }
    std::uint64_t served(int service) const { return served_[service]; }
    std::uint64_t traffic_bytes() const { return traffic_bytes_; }
    std::uint64_t messages() const { return messages_; }

    int busy_threads() const { return busy_threads_; }

    /// Exact integrals of the busy-PU / busy-thread counts since the
    /// previous call.
    double take_busy_pu_seconds(Micros now);
    double take_busy_thread_seconds(Micros now);

  private:
    std::uint32_t id_;
    MdcConfig cfg_;
    PowerModel pm_;
    std::vector<ProcessingUnit> pus_;
    std::map<std::pair<std::int64_t, int>, Session> sessions_;
    std::uint64_t next_session_ = 0;
    int reserved_threads_ = 0;
    int busy_pus_ = 0;
    int busy_threads_ = 0;
    std::uint64_t rejections_ = 0;
    std::uint64_t served_[8] = {};
    std::uint64_t traffic_bytes_ = 0;
    std::uint64_t messages_ = 0;
    Micros last_change_ = 0;
    double busy_pu_micros_ = 0.0;
    double busy_thread_micros_ = 0.0;
};

enum class LogKind : std::uint8_t {
    SessionOpen,
    SessionClose,
    SessionReject,
    OpStart,
    OpFinish,
    OpCancel,
};

const char* to_string(LogKind kind);

struct LogEntry {
    Micros t = 0;
    LogKind kind = LogKind::SessionOpen;
    std::int64_t agent_id = -1;
    std::uint32_t mdc = 0;
    int pu = -1;
    int service = 0;
    std::uint64_t ref = 0;  ///< session or op id
};

struct MdcSample {
    Micros t = 0;
    int reserved_threads = 0;
    int busy_threads = 0;
    int busy_pus = 0;
    double power_w = 0.0;
    double busy_pu_seconds = 0.0;      ///< exact integral over the preceding interval
    double busy_thread_seconds = 0.0;  ///< same for executing threads
    std::uint64_t rejections_cum = 0;
    std::uint64_t served_inference_cum = 0;
    std::uint64_t served_training_cum = 0;
    std::uint64_t traffic_bytes_cum = 0;
    std::uint64_t messages_cum = 0;
};

struct SimParams {
    double duration_s = 7200.0;
    double sample_interval_s = 60.0;
    double retry_interval_s = 1.0;
    std::uint64_t seed = 1;
    bool keep_log = true;
};

struct RawResults {
    std::string scenario;
    MdcConfig mdc_config;
    PowerModel power_model;
    double duration_s = 0.0;
    double sample_interval_s = 0.0;
    std::vector<std::vector<MdcSample>> series;  ///< [mdc][sample]
    std::vector<LogEntry> log;                   ///< when keep_log
    std::uint64_t log_hash = 0;                  ///< FNV over all log entries

    std::size_t n_mdcs() const { return series.size(); }
};

/// Replays the trace on the event engine: agent enter/exit, handovers,
/// session admission with 1 s retry, periodic inference and
/// completion-anchored training requests, idle/active power accounting.
RawResults run_simulation(const MobilityTrace& trace, const Topology& topo,
                          const std::vector<ServiceSpec>& services,
                          MdcConfig mdc_cfg, PowerModel pm, const SimParams& params);

void write_raw_csv(const RawResults& raw, const std::filesystem::path& path);
/// Reads series back; scenario/config fields come from the arguments.
RawResults read_raw_csv(const std::filesystem::path& path, const std::string& scenario,
                        MdcConfig mdc_cfg, PowerModel pm, double duration_s,
                        double sample_interval_s);

void write_event_log_csv(const RawResults& raw, const std::filesystem::path& path);

/// Scans a run's event log for violations of the first-fit rule: PU k may
/// receive a reservation only while PUs 0..k-1 are full. Returns the number
/// of violations (0 for a conforming run).
std::size_t first_fit_violations(const RawResults& raw);

}  // namespace mdcsim

#endif
