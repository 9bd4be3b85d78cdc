#include "mdcsim/mobility.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "mdcsim/rng.hpp"

namespace mdcsim {

namespace {

// All itinerary and record times live on a 1 ms grid so the 3-decimal CSV
// representation is lossless.
double quantize_ms(double t) { return std::round(t * 1000.0) / 1000.0; }

void append_time(std::string& out, double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", t);
    out += buf;
}

void append_double(std::string& out, double v) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, end);
}

double parse_double(const std::string& field, const std::filesystem::path& path, int line) {
    double v = 0.0;
    const char* b = field.data();
    auto [p, ec] = std::from_chars(b, b + field.size(), v);
    if (ec != std::errc() || p != b + field.size())
        throw TraceParseError(path.string() + ":" + std::to_string(line) +
                              ": bad numeric field '" + field + "'");
    return v;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, ',')) out.push_back(cur);
    return out;
}

}  // namespace

void MobilityConfig::validate() const {
    if (!(wave_period > 0.0) || wave_size < 1 || !(walk_speed > 0.0) ||
        !(dwell_min > 0.0) || !(duration > 0.0) || !(sample_step > 0.0))
        throw InvalidParameterError("mobility config fields must be strictly positive");
    if (dwell_min > dwell_max)
        throw InvalidParameterError("dwell_min must be <= dwell_max");
}

MobilityTrace generate_trace(const ScenarioMap& map, const MobilityConfig& cfg,
                             std::uint64_t seed) {
    validate_map(map);
    cfg.validate();

    MobilityTrace trace;
    std::int64_t agent_id = 0;
    for (double t_wave = 0.0; t_wave < cfg.duration; t_wave += cfg.wave_period) {
        const double t_enter = quantize_ms(t_wave);
        for (int i = 0; i < cfg.wave_size; ++i, ++agent_id) {
            rng::Stream rs(seed, {10, static_cast<std::uint64_t>(agent_id)});
            AgentItinerary it;
            it.agent_id = agent_id;
            it.t_enter = t_enter;
            it.entry = map.entry_points[rs.uniform_index(map.entry_points.size())];
            const Rect& area = map.activity_areas[rs.uniform_index(map.activity_areas.size())];
            it.destination = {rs.uniform(area.x, area.x + area.w),
                              rs.uniform(area.y, area.y + area.h)};
            it.t_arrive = std::max(quantize_ms(t_enter + dist(it.entry, it.destination) / cfg.walk_speed),
                                   t_enter + 0.001);
            it.t_depart = quantize_ms(it.t_arrive + rs.uniform(cfg.dwell_min, cfg.dwell_max));
            it.exit = map.entry_points[nearest_index(it.destination, map.entry_points)];
            it.t_exit = std::max(quantize_ms(it.t_depart + dist(it.destination, it.exit) / cfg.walk_speed),
                                 it.t_depart + 0.001);
            trace.itineraries.push_back(it);
        }
    }

    for (const AgentItinerary& it : trace.itineraries) {
        const double t_last = std::min(it.t_exit, cfg.duration);
        const auto k_start = static_cast<std::int64_t>(std::ceil(it.t_enter / cfg.sample_step - 1e-9));
        const auto k_end = static_cast<std::int64_t>(std::floor(t_last / cfg.sample_step + 1e-9));
        for (std::int64_t k = k_start; k <= k_end; ++k) {
            const double t = quantize_ms(static_cast<double>(k) * cfg.sample_step);
            if (auto pos = position_at(it, t))
                trace.records.push_back({t, it.agent_id, *pos});
        }
    }
    std::sort(trace.records.begin(), trace.records.end(),
              [](const TraceRecord& a, const TraceRecord& b) {
                  return a.t != b.t ? a.t < b.t : a.agent_id < b.agent_id;
              });
    return trace;
}

std::optional<GeoPoint> position_at(const AgentItinerary& it, double t) {
    if (t < it.t_enter || t > it.t_exit) return std::nullopt;
    if (t < it.t_arrive) {
        const double f = (t - it.t_enter) / (it.t_arrive - it.t_enter);
        return GeoPoint{it.entry.x + (it.destination.x - it.entry.x) * f,
                        it.entry.y + (it.destination.y - it.entry.y) * f};
    }
    if (t <= it.t_depart) return it.destination;
    const double f = (t - it.t_depart) / (it.t_exit - it.t_depart);
    return GeoPoint{it.destination.x + (it.exit.x - it.destination.x) * f,
                    it.destination.y + (it.exit.y - it.destination.y) * f};
}

std::filesystem::path itinerary_path_for(const std::filesystem::path& trace_path) {
    std::filesystem::path p = trace_path;
    p += ".itineraries.csv";
    return p;
}

void write_trace(const MobilityTrace& trace, const std::filesystem::path& path) {
    {
        std::string out = "t,agent_id,x,y\n";
        for (const TraceRecord& r : trace.records) {
            append_time(out, r.t);
            out += ',';
            out += std::to_string(r.agent_id);
            out += ',';
            append_double(out, r.pos.x);
            out += ',';
            append_double(out, r.pos.y);
            out += '\n';
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write trace file: " + path.string());
        f << out;
    }
    {
        std::string out = "agent_id,t_enter,ex,ey,dx,dy,t_arrive,t_depart,xx,xy,t_exit\n";
        for (const AgentItinerary& it : trace.itineraries) {
            out += std::to_string(it.agent_id);
            out += ',';
            append_time(out, it.t_enter);
            out += ',';
            append_double(out, it.entry.x);
            out += ',';
            append_double(out, it.entry.y);
            out += ',';
            append_double(out, it.destination.x);
            out += ',';
            append_double(out, it.destination.y);
            out += ',';
            append_time(out, it.t_arrive);
            out += ',';
            append_time(out, it.t_depart);
            out += ',';
            append_double(out, it.exit.x);
            out += ',';
            append_double(out, it.exit.y);
            out += ',';
            append_time(out, it.t_exit);
            out += '\n';
        }
        const auto ipath = itinerary_path_for(path);
        std::ofstream f(ipath, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write itinerary file: " + ipath.string());
        f << out;
    }
}

MobilityTrace read_trace(const std::filesystem::path& path) {
    MobilityTrace trace;
    {
        std::ifstream f(path);
        if (!f) throw TraceParseError("cannot open trace file: " + path.string());
        std::string line;
        int lineno = 0;
        if (!std::getline(f, line) || line != "t,agent_id,x,y")
            throw TraceParseError(path.string() + ":1: missing or bad trace header");
        ++lineno;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto fields = split_csv(line);
            if (fields.size() != 4)
                throw TraceParseError(path.string() + ":" + std::to_string(lineno) +
                                      ": expected 4 fields, got " + std::to_string(fields.size()));
            TraceRecord r;
            r.t = parse_double(fields[0], path, lineno);
            r.agent_id = static_cast<std::int64_t>(parse_double(fields[1], path, lineno));
            r.pos = {parse_double(fields[2], path, lineno), parse_double(fields[3], path, lineno)};
            trace.records.push_back(r);
        }
    }
    {
        const auto ipath = itinerary_path_for(path);
        std::ifstream f(ipath);
        if (!f) throw TraceParseError("cannot open itinerary file: " + ipath.string());
        std::string line;
        int lineno = 0;
        if (!std::getline(f, line) ||
            line != "agent_id,t_enter,ex,ey,dx,dy,t_arrive,t_depart,xx,xy,t_exit")
            throw TraceParseError(ipath.string() + ":1: missing or bad itinerary header");
        ++lineno;
        while (std::getline(f, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto fields = split_csv(line);
            if (fields.size() != 11)
                throw TraceParseError(ipath.string() + ":" + std::to_string(lineno) +
                                      ": expected 11 fields, got " + std::to_string(fields.size()));
            AgentItinerary it;
            it.agent_id = static_cast<std::int64_t>(parse_double(fields[0], ipath, lineno));
            it.t_enter = parse_double(fields[1], ipath, lineno);
            it.entry = {parse_double(fields[2], ipath, lineno), parse_double(fields[3], ipath, lineno)};
            it.destination = {parse_double(fields[4], ipath, lineno), parse_double(fields[5], ipath, lineno)};
            it.t_arrive = parse_double(fields[6], ipath, lineno);
            it.t_depart = parse_double(fields[7], ipath, lineno);
            it.exit = {parse_double(fields[8], ipath, lineno), parse_double(fields[9], ipath, lineno)};
            it.t_exit = parse_double(fields[10], ipath, lineno);
            trace.itineraries.push_back(it);
        }
    }
    return trace;
}

std::size_t live_agents_at(const MobilityTrace& trace, double t) {
    std::size_t n = 0;
    for (const AgentItinerary& it : trace.itineraries)
        if (it.t_enter <= t && t <= it.t_exit) ++n;
    return n;
}

}  // namespace mdcsim
