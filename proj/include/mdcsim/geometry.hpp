#ifndef MDCSIM_GEOMETRY_HPP
#define MDCSIM_GEOMETRY_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <vector>

namespace mdcsim {

/// Planar position in meters, east/north in a local frame.
struct GeoPoint {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const GeoPoint&) const = default;
};

inline double dist(GeoPoint a, GeoPoint b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Axis-aligned rectangle (lower-left corner + extent).
struct Rect {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;
    bool operator==(const Rect&) const = default;
    bool contains(GeoPoint p) const {
        return p.x >= x && p.x <= x + w && p.y >= y && p.y <= y + h;
    }
    GeoPoint center() const { return {x + w / 2.0, y + h / 2.0}; }
};

struct Bounds {
    double width = 0.0;
    double height = 0.0;
    bool operator==(const Bounds&) const = default;
    bool contains(GeoPoint p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }
    GeoPoint center() const { return {width / 2.0, height / 2.0}; }
    double diagonal() const { return std::hypot(width, height); }
};

/// Urban scenario: metro entry/exit points, destination areas, hospitals.
/// Collection order is preserved from the file; indices are stable ids.
struct ScenarioMap {
    Bounds bounds;
    std::vector<GeoPoint> entry_points;
    std::vector<Rect> activity_areas;
    std::vector<GeoPoint> hospitals;
    bool operator==(const ScenarioMap&) const = default;
};

struct MapParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MapValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InvalidParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Throws MapValidationError naming the first offending element.
void validate_map(const ScenarioMap& map);

ScenarioMap load_map(const std::filesystem::path& path);
void write_map(const ScenarioMap& map, const std::filesystem::path& path);

/// Deterministic synthetic map: entry points and hospitals uniform in
/// bounds, activity areas non-degenerate rectangles inside bounds.
ScenarioMap generate_synthetic_map(double width, double height,
                                   int n_entries, int n_areas, int n_hospitals,
                                   std::uint64_t seed);

/// Index of the candidate nearest to p (Euclidean); ties break to the
/// lowest index. Throws InvalidParameterError on an empty span.
std::size_t nearest_index(GeoPoint p, std::span<const GeoPoint> candidates);

}  // namespace mdcsim

#endif
