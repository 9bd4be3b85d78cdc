#ifndef MDCSIM_PLACEMENT_HPP
#define MDCSIM_PLACEMENT_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mdcsim/geometry.hpp"
#include "mdcsim/mobility.hpp"

namespace mdcsim {

/// Cell values hold the maximum number of distinct agents observed in the
/// cell within any single time window.
struct PresenceGrid {
    int resolution = 40;
    double window = 60.0;
    Bounds bounds;
    std::vector<double> cells;  ///< row-major, cells[iy * resolution + ix]

    double cell_width() const { return bounds.width / resolution; }
    double cell_height() const { return bounds.height / resolution; }
    double value(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * resolution + ix]; }
    GeoPoint cell_center(int ix, int iy) const {
        return {(ix + 0.5) * cell_width(), (iy + 0.5) * cell_height()};
    }
    int cell_x_of(double x) const {
        int ix = static_cast<int>(x / cell_width());
        return std::min(std::max(ix, 0), resolution - 1);
    }
    int cell_y_of(double y) const {
        int iy = static_cast<int>(y / cell_height());
        return std::min(std::max(iy, 0), resolution - 1);
    }
};

PresenceGrid build_presence_grid(const MobilityTrace& trace, Bounds bounds,
                                 int resolution, double window);

void write_grid_csv(const PresenceGrid& grid, const std::filesystem::path& path);

struct InfeasibleKError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KmeansResult {
    std::vector<GeoPoint> centroids;
    std::vector<std::uint32_t> labels;  ///< per input point
    double inertia = 0.0;
    int iterations = 0;
};

/// Lloyd's algorithm with seeded k-means++-style initialization.
/// Zero-weight points are ignored; throws InfeasibleKError when fewer than
/// k positively weighted points exist. tol <= 0 selects the default of
/// 1e-6 * the input's bounding-box diagonal.
KmeansResult weighted_kmeans(std::span<const GeoPoint> points, std::span<const double> weights,
                             std::size_t k, std::uint64_t seed,
                             double tol = -1.0, int max_iter = 300);

enum class ScenarioTag { C3, H1, H3, H9 };

std::string to_string(ScenarioTag tag);
ScenarioTag scenario_tag_from_string(const std::string& s);

struct Placement {
    std::vector<GeoPoint> aps;
    std::vector<GeoPoint> mdcs;
    std::vector<std::uint32_t> ap_to_mdc;  ///< nearest-MDC index per AP
    ScenarioTag tag = ScenarioTag::C3;
    bool operator==(const Placement&) const = default;
};

/// Cluster the presence grid's positively weighted cell centers, once for
/// APs and once for MDCs.
Placement place(const PresenceGrid& grid, std::size_t n_aps, std::size_t n_mdcs,
                std::uint64_t seed);

/// Hospital-snapping scenario variants; base must be a C3 placement.
Placement derive_scenario(const Placement& base, const ScenarioMap& map, ScenarioTag tag);

void write_placement(const Placement& p, const std::filesystem::path& path);
Placement load_placement(const std::filesystem::path& path);

}  // namespace mdcsim

#endif
