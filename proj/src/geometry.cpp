#include "mdcsim/geometry.hpp"

#include <fstream>
#include <limits>
#include <string>

#include <json.hpp>

#include "mdcsim/rng.hpp"

namespace mdcsim {

using nlohmann::json;

namespace {

constexpr int kMapSchemaVersion = 1;

bool finite(GeoPoint p) { return std::isfinite(p.x) && std::isfinite(p.y); }

}  // namespace

void validate_map(const ScenarioMap& map) {
    if (!(map.bounds.width > 0.0) || !(map.bounds.height > 0.0))
        throw MapValidationError("bounds must have positive width and height");
    if (map.entry_points.empty()) throw MapValidationError("map has no entry points");
    if (map.activity_areas.empty()) throw MapValidationError("map has no activity areas");
    if (map.hospitals.empty()) throw MapValidationError("map has no hospitals");
    for (std::size_t i = 0; i < map.entry_points.size(); ++i) {
        const GeoPoint p = map.entry_points[i];
        if (!finite(p) || !map.bounds.contains(p))
            throw MapValidationError("entry point " + std::to_string(i) + " outside bounds");
    }
    for (std::size_t i = 0; i < map.activity_areas.size(); ++i) {
        const Rect& r = map.activity_areas[i];
        if (!std::isfinite(r.x) || !std::isfinite(r.y) || r.w <= 0.0 || r.h <= 0.0 ||
            !map.bounds.contains({r.x, r.y}) || !map.bounds.contains({r.x + r.w, r.y + r.h}))
            throw MapValidationError("activity area " + std::to_string(i) +
                                     " degenerate or outside bounds");
    }
    for (std::size_t i = 0; i < map.hospitals.size(); ++i) {
        const GeoPoint p = map.hospitals[i];
        if (!finite(p) || !map.bounds.contains(p))
            throw MapValidationError("hospital " + std::to_string(i) + " outside bounds");
    }
}

ScenarioMap load_map(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MapParseError("cannot open map file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw MapParseError("malformed map file " + path.string() + ": " + e.what());
    }
    ScenarioMap map;
    try {
        if (j.at("schema").get<int>() != kMapSchemaVersion)
            throw MapParseError("unsupported map schema version in " + path.string());
        map.bounds.width = j.at("bounds").at("width").get<double>();
        map.bounds.height = j.at("bounds").at("height").get<double>();
        for (const auto& p : j.at("entry_points"))
            map.entry_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        for (const auto& a : j.at("activity_areas"))
            map.activity_areas.push_back({a.at("x").get<double>(), a.at("y").get<double>(),
                                          a.at("w").get<double>(), a.at("h").get<double>()});
        for (const auto& p : j.at("hospitals"))
            map.hospitals.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    } catch (const json::exception& e) {
        throw MapParseError("malformed map file " + path.string() + ": " + e.what());
    }
    validate_map(map);
    return map;
}

void write_map(const ScenarioMap& map, const std::filesystem::path& path) {
    json j;
    j["schema"] = kMapSchemaVersion;
    j["bounds"] = {{"width", map.bounds.width}, {"height", map.bounds.height}};
    j["entry_points"] = json::array();
    for (const GeoPoint p : map.entry_points) j["entry_points"].push_back({p.x, p.y});
    j["activity_areas"] = json::array();
    for (const Rect& r : map.activity_areas)
        j["activity_areas"].push_back({{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}});
    j["hospitals"] = json::array();
    for (const GeoPoint p : map.hospitals) j["hospitals"].push_back({p.x, p.y});
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write map file: " + path.string());
    out << j.dump(2) << '\n';
}

ScenarioMap generate_synthetic_map(double width, double height,
                                   int n_entries, int n_areas, int n_hospitals,
                                   std::uint64_t seed) {
    if (!(width > 0.0) || !(height > 0.0))
        throw InvalidParameterError("map dimensions must be positive");
    if (n_entries < 1 || n_areas < 1 || n_hospitals < 1)
        throw InvalidParameterError("entry/area/hospital counts must be >= 1");

    ScenarioMap map;
    map.bounds = {width, height};

    rng::Stream entries(seed, {1});
    for (int i = 0; i < n_entries; ++i)
        map.entry_points.push_back({entries.uniform(0.0, width), entries.uniform(0.0, height)});

    // Areas span 4-12% of each axis, placed fully inside bounds.
    rng::Stream areas(seed, {2});
    for (int i = 0; i < n_areas; ++i) {
        const double w = areas.uniform(0.04, 0.12) * width;
        const double h = areas.uniform(0.04, 0.12) * height;
        const double x = areas.uniform(0.0, width - w);
        const double y = areas.uniform(0.0, height - h);
        map.activity_areas.push_back({x, y, w, h});
    }

    rng::Stream hospitals(seed, {3});
    for (int i = 0; i < n_hospitals; ++i)
        map.hospitals.push_back({hospitals.uniform(0.0, width), hospitals.uniform(0.0, height)});

    validate_map(map);
    return map;
}

std::size_t nearest_index(GeoPoint p, std::span<const GeoPoint> candidates) {
    if (candidates.empty()) throw InvalidParameterError("nearest_index: no candidates");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const double dx = candidates[i].x - p.x;
        const double dy = candidates[i].y - p.y;
        const double d = dx * dx + dy * dy;
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

}  // namespace mdcsim
