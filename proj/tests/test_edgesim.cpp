#include <doctest.h>

#include <filesystem>
#include <map>
#include <vector>

#include "mdcsim/edgesim.hpp"
#include "mdcsim/rng.hpp"
#include "mdcsim/topology.hpp"

using namespace mdcsim;
namespace fs = std::filesystem;
using engine::to_micros;

namespace {

Topology one_mdc_topology() {
    Placement p;
    p.tag = ScenarioTag::H1;
    p.aps = {{0.0, 0.0}};
    p.mdcs = {{0.0, 0.0}};
    p.ap_to_mdc = {0};
    return Topology(p);
}

AgentItinerary resident(std::int64_t id, double t_enter, double t_exit) {
    AgentItinerary it;
    it.agent_id = id;
    it.t_enter = t_enter;
    it.entry = {0.0, 0.0};
    it.destination = {0.0, 0.0};
    it.t_arrive = t_enter + 0.001;
    it.t_depart = t_exit - 0.001;
    it.exit = {0.0, 0.0};
    it.t_exit = t_exit;
    return it;
}

MobilityTrace residents(int n, double t_exit) {
    MobilityTrace t;
    for (int i = 0; i < n; ++i) t.itineraries.push_back(resident(i, 0.0, t_exit));
    return t;
}

}  // namespace

TEST_CASE("service table: packet sizes and thread shares") {
    const ServiceSpec inf = inference_service();
    CHECK(inf.total_bytes() == 119);
    CHECK(inf.payload_bytes == 65);
    CHECK(inf.header_bytes == 54);
    CHECK(inf.period_s == 60.0);
    CHECK(inf.op_time_s == 1.17);
    CHECK(inf.periodic);

    const ServiceSpec tr = training_service();
    CHECK(tr.total_bytes() == 74);
    CHECK(tr.payload_bytes == 20);
    CHECK(tr.op_time_s == 18.0);
    CHECK(!tr.periodic);
    CHECK(tr.gap_min_s == 1.0);
    CHECK(tr.gap_max_s == 86400.0);

    // One thread of sixteen = 6.25% of a PU.
    const MdcConfig cfg;
    CHECK(static_cast<double>(inf.threads_per_request) / cfg.threads_per_pu == 0.0625);
    CHECK(cfg.capacity() == 160);
}

TEST_CASE("pu_power follows the idle/active rule") {
    const PowerModel pm;
    ProcessingUnit pu;
    CHECK(pu_power(pu, pm) == 47.0);
    pu.reserved.push_back(1);  // a reservation alone stays idle
    CHECK(pu_power(pu, pm) == 47.0);
    pu.busy_ops = 1;
    CHECK(pu_power(pu, pm) == 95.0);
    pu.busy_ops = 16;
    CHECK(pu_power(pu, pm) == 95.0);

    const Mdc idle(0, {}, pm);
    CHECK(idle.power_w() == 470.0);
}

TEST_CASE("open_session is first-fit over PUs") {
    Mdc mdc(0, {}, {});
    const auto first = mdc.open_session(0, 0, 0);
    REQUIRE(first.accepted);
    CHECK(first.session.pu == 0);

    // Fill PU 0 (16 threads): the 17th reservation goes to PU 1.
    for (int a = 1; a < 16; ++a) CHECK(mdc.open_session(a, 0, 0).session.pu == 0);
    CHECK(mdc.open_session(16, 0, 0).session.pu == 1);
    CHECK(mdc.reserved_threads() == 17);

    // Freeing a PU-0 slot makes PU 0 preferred again.
    mdc.close_session(3, 0);
    CHECK(mdc.open_session(17, 0, 0).session.pu == 0);
}

TEST_CASE("capacity: 160 sessions fit, the 161st is rejected") {
    Mdc mdc(0, {}, {});
    for (int a = 0; a < 160; ++a) REQUIRE(mdc.open_session(a, 0, 0).accepted);
    CHECK(mdc.reserved_threads() == 160);
    CHECK(!mdc.open_session(160, 0, 0).accepted);
    CHECK(mdc.rejections() == 1);
    mdc.close_session(42, 0);
    CHECK(mdc.open_session(160, 0, 0).accepted);
    CHECK(mdc.rejections() == 1);
}

TEST_CASE("duplicate sessions and unknown closes are programming faults") {
    Mdc mdc(0, {}, {});
    REQUIRE(mdc.open_session(7, 0, 0).accepted);
    CHECK_THROWS_AS(mdc.open_session(7, 0, 0), DuplicateSessionError);
    CHECK_NOTHROW(mdc.open_session(7, 1, 0));  // other service is fine
    CHECK_THROWS_AS(mdc.close_session(8, 0), std::logic_error);
}

TEST_CASE("handover bookkeeping conserves reserved threads") {
    Mdc old_mdc(0, {}, {}), new_mdc(1, {}, {});
    for (int a = 0; a < 10; ++a)
        for (int svc = 0; svc < 2; ++svc) REQUIRE(old_mdc.open_session(a, svc, 0).accepted);
    const int before = old_mdc.reserved_threads() + new_mdc.reserved_threads();
    CHECK(before == 20);
    for (int svc = 0; svc < 2; ++svc) {
        old_mdc.close_session(4, svc);
        REQUIRE(new_mdc.open_session(4, svc, 10).accepted);
    }
    CHECK(old_mdc.reserved_threads() + new_mdc.reserved_threads() == before);
}

TEST_CASE("training gaps: bounds, determinism, and mean of U[1s, 1d]") {
    const ServiceSpec tr = training_service();
    double sum = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double g = training_gap(7, i % 100, static_cast<std::uint64_t>(i / 100), tr);
        CHECK(g >= 1.0);
        CHECK(g <= 86400.0);
        CHECK(g == training_gap(7, i % 100, static_cast<std::uint64_t>(i / 100), tr));
        sum += g;
    }
    const double mean = sum / 10000.0;
    CHECK(mean == doctest::Approx(43200.5).epsilon(0.02));
    // Quantized to the millisecond grid.
    const double g = training_gap(3, 5, 0, tr);
    CHECK(g * 1000.0 == doctest::Approx(std::round(g * 1000.0)).epsilon(1e-12));
}

TEST_CASE("idle baseline: empty trace keeps every MDC at 470 W") {
    SimParams sp;
    sp.duration_s = 600.0;
    const RawResults raw =
        run_simulation(MobilityTrace{}, one_mdc_topology(), default_services(), {}, {}, sp);
    REQUIRE(raw.series.size() == 1);
    CHECK(raw.series[0].size() == 11);  // samples at 0, 60, ..., 600
    for (const MdcSample& s : raw.series[0]) {
        CHECK(s.power_w == 470.0);
        CHECK(s.reserved_threads == 0);
        CHECK(s.rejections_cum == 0);
        CHECK(s.busy_pu_seconds == 0.0);
    }
}

TEST_CASE("single resident agent: periodic inference op count and traffic") {
    MobilityTrace trace;
    trace.itineraries.push_back(resident(0, 0.0, 10000.0));  // truncated at horizon
    SimParams sp;
    sp.duration_s = 660.0;
    const std::vector<ServiceSpec> services = {inference_service()};
    const RawResults raw = run_simulation(trace, one_mdc_topology(), services, {}, {}, sp);
    const MdcSample& last = raw.series[0].back();
    // By the final sample at 660 s the ops started at 0, 60, ..., 600 have
    // all finished; the sample precedes the start scheduled at 660.
    CHECK(last.served_inference_cum == 11);
    CHECK(last.served_training_cum == 0);
    // One request + one response message of 119 B per served op.
    CHECK(last.messages_cum == 22);
    CHECK(last.traffic_bytes_cum == 22 * 119);
    CHECK(first_fit_violations(raw) == 0);
}

TEST_CASE("reservation utilization vs busy utilization") {
    MobilityTrace trace = residents(8, 700.0);
    SimParams sp;
    sp.duration_s = 600.0;
    const std::vector<ServiceSpec> services = {inference_service()};
    const RawResults raw = run_simulation(trace, one_mdc_topology(), services, {}, {}, sp);
    for (std::size_t i = 1; i < raw.series[0].size(); ++i) {
        const MdcSample& s = raw.series[0][i];
        CHECK(s.reserved_threads == 8);
        // 8 agents x 1.17 s busy every 60 s on one PU.
        CHECK(s.busy_thread_seconds == doctest::Approx(8 * 1.17).epsilon(1e-9));
        CHECK(s.busy_pu_seconds > 0.0);
        CHECK(s.busy_pu_seconds <= s.busy_thread_seconds + 1e-9);
    }
}

TEST_CASE("power law holds at every sample of a busy run") {
    MobilityTrace trace = residents(40, 700.0);
    SimParams sp;
    sp.duration_s = 600.0;
    sp.sample_interval_s = 7.0;  // land samples inside op windows
    const RawResults raw =
        run_simulation(trace, one_mdc_topology(), default_services(), {}, {}, sp);
    bool saw_active = false;
    for (const MdcSample& s : raw.series[0]) {
        CHECK(s.power_w == 470.0 + 48.0 * s.busy_pus);
        CHECK(s.power_w >= 470.0);
        CHECK(s.power_w <= 950.0);
        saw_active = saw_active || s.busy_pus > 0;
    }
    CHECK(saw_active);
    CHECK(first_fit_violations(raw) == 0);
}

TEST_CASE("rejected sessions retry and eventually open after capacity frees") {
    // 161 single-service agents: one rejection per retry until an exit frees
    // a thread.
    MobilityTrace trace = residents(161, 700.0);
    trace.itineraries[160] = resident(160, 0.0, 700.0);
    trace.itineraries[0].t_depart = 9.999;
    trace.itineraries[0].t_exit = 10.0;  // agent 0 leaves at t=10
    SimParams sp;
    sp.duration_s = 60.0;
    const std::vector<ServiceSpec> services = {inference_service()};
    const RawResults raw = run_simulation(trace, one_mdc_topology(), services, {}, {}, sp);
    const MdcSample& last = raw.series[0].back();
    CHECK(last.rejections_cum >= 1);
    CHECK(last.reserved_threads == 160);  // the waiter got the freed slot
    CHECK(first_fit_violations(raw) == 0);
}

TEST_CASE("simulation runs are deterministic (log hash stable)") {
    MobilityTrace trace = residents(20, 500.0);
    SimParams sp;
    sp.duration_s = 400.0;
    sp.seed = 99;
    const RawResults a =
        run_simulation(trace, one_mdc_topology(), default_services(), {}, {}, sp);
    const RawResults b =
        run_simulation(trace, one_mdc_topology(), default_services(), {}, {}, sp);
    CHECK(a.log_hash == b.log_hash);
    CHECK(a.log.size() == b.log.size());
    CHECK(a.series[0].back().traffic_bytes_cum == b.series[0].back().traffic_bytes_cum);
}

TEST_CASE("raw results CSV round trips") {
    MobilityTrace trace = residents(5, 700.0);
    SimParams sp;
    sp.duration_s = 300.0;
    const RawResults raw =
        run_simulation(trace, one_mdc_topology(), default_services(), {}, {}, sp);
    const fs::path p = fs::temp_directory_path() / "mdcsim_raw_rt.csv";
    write_raw_csv(raw, p);
    const RawResults back = read_raw_csv(p, raw.scenario, raw.mdc_config, raw.power_model,
                                         raw.duration_s, raw.sample_interval_s);
    REQUIRE(back.series.size() == raw.series.size());
    for (std::size_t m = 0; m < raw.series.size(); ++m) {
        REQUIRE(back.series[m].size() == raw.series[m].size());
        for (std::size_t i = 0; i < raw.series[m].size(); ++i) {
            const MdcSample& x = raw.series[m][i];
            const MdcSample& y = back.series[m][i];
            CHECK(x.t == y.t);
            CHECK(x.reserved_threads == y.reserved_threads);
            CHECK(x.busy_threads == y.busy_threads);
            CHECK(x.busy_pus == y.busy_pus);
            CHECK(x.power_w == y.power_w);
            CHECK(x.busy_pu_seconds == y.busy_pu_seconds);
            CHECK(x.busy_thread_seconds == y.busy_thread_seconds);
            CHECK(x.rejections_cum == y.rejections_cum);
            CHECK(x.served_inference_cum == y.served_inference_cum);
            CHECK(x.served_training_cum == y.served_training_cum);
            CHECK(x.traffic_bytes_cum == y.traffic_bytes_cum);
            CHECK(x.messages_cum == y.messages_cum);
        }
    }
    fs::remove(p);

    const fs::path lp = fs::temp_directory_path() / "mdcsim_events.csv";
    write_event_log_csv(raw, lp);
    CHECK(fs::file_size(lp) > 0);
    fs::remove(lp);
}

TEST_CASE("run_simulation validates its inputs") {
    SimParams sp;
    CHECK_THROWS_AS(run_simulation({}, one_mdc_topology(), {}, {}, {}, sp),
                    InvalidParameterError);
    SimParams bad;
    bad.duration_s = 0.0;
    CHECK_THROWS_AS(run_simulation({}, one_mdc_topology(), default_services(), {}, {}, bad),
                    InvalidParameterError);
}
