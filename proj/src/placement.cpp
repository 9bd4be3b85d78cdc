#include "mdcsim/placement.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "mdcsim/kernels.hpp"
#include "mdcsim/rng.hpp"

namespace mdcsim {

using nlohmann::json;

PresenceGrid build_presence_grid(const MobilityTrace& trace, Bounds bounds,
                                 int resolution, double window) {
    if (resolution < 1) throw InvalidParameterError("grid resolution must be >= 1");
    if (!(window > 0.0)) throw InvalidParameterError("grid window must be > 0");

    PresenceGrid grid;
    grid.resolution = resolution;
    grid.window = window;
    grid.bounds = bounds;
    grid.cells.assign(static_cast<std::size_t>(resolution) * resolution, 0.0);

    // Records are time-sorted, so windows can be processed one at a time.
    // Within a window, count distinct (cell, agent) pairs per cell.
    std::vector<std::pair<std::uint64_t, std::int64_t>> seen;  // (cell, agent)
    std::int64_t cur_window = -1;
    auto flush = [&] {
        if (seen.empty()) return;
        std::sort(seen.begin(), seen.end());
        seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
        std::size_t i = 0;
        while (i < seen.size()) {
            std::size_t j = i;
            while (j < seen.size() && seen[j].first == seen[i].first) ++j;
            const auto cell = seen[i].first;
            grid.cells[cell] = std::max(grid.cells[cell], static_cast<double>(j - i));
            i = j;
        }
        seen.clear();
    };
    for (const TraceRecord& r : trace.records) {
        const auto w = static_cast<std::int64_t>(std::floor(r.t / window + 1e-9));
        if (w != cur_window) {
            flush();
            cur_window = w;
        }
        const std::uint64_t cell =
            static_cast<std::uint64_t>(grid.cell_y_of(r.pos.y)) * resolution + grid.cell_x_of(r.pos.x);
        seen.emplace_back(cell, r.agent_id);
    }
    flush();
    return grid;
}

void write_grid_csv(const PresenceGrid& grid, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write grid file: " + path.string());
    for (int iy = 0; iy < grid.resolution; ++iy) {
        for (int ix = 0; ix < grid.resolution; ++ix) {
            if (ix) f << ',';
            f << grid.value(ix, iy);
        }
        f << '\n';
    }
}

namespace {

struct SoA {
    std::vector<double> xs, ys;
    void from(std::span<const GeoPoint> pts) {
        xs.reserve(pts.size());
        ys.reserve(pts.size());
        for (const GeoPoint p : pts) {
            xs.push_back(p.x);
            ys.push_back(p.y);
        }
    }
};

// Weighted sample from cumulative masses; deterministic for a given draw.
std::size_t sample_by_mass(const std::vector<double>& mass, double u) {
    const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
    double target = u * total;
    for (std::size_t i = 0; i < mass.size(); ++i) {
        target -= mass[i];
        if (target < 0.0 && mass[i] > 0.0) return i;
    }
    for (std::size_t i = mass.size(); i-- > 0;)
        if (mass[i] > 0.0) return i;
    return 0;
}

}  // namespace

KmeansResult weighted_kmeans(std::span<const GeoPoint> points, std::span<const double> weights,
                             std::size_t k, std::uint64_t seed, double tol, int max_iter) {
    if (points.size() != weights.size())
        throw InvalidParameterError("weighted_kmeans: points/weights size mismatch");
    if (k < 1) throw InvalidParameterError("weighted_kmeans: k must be >= 1");

    std::vector<std::size_t> positive;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (weights[i] < 0.0) throw InvalidParameterError("weighted_kmeans: negative weight");
        if (weights[i] > 0.0) positive.push_back(i);
    }
    if (positive.size() < k)
        throw InfeasibleKError("weighted_kmeans: " + std::to_string(positive.size()) +
                               " positively weighted points for k=" + std::to_string(k));

    if (tol <= 0.0) {
        double min_x = points[positive[0]].x, max_x = min_x;
        double min_y = points[positive[0]].y, max_y = min_y;
        for (std::size_t i : positive) {
            min_x = std::min(min_x, points[i].x);
            max_x = std::max(max_x, points[i].x);
            min_y = std::min(min_y, points[i].y);
            max_y = std::max(max_y, points[i].y);
        }
        tol = 1e-6 * std::hypot(max_x - min_x, max_y - min_y);
        if (tol == 0.0) tol = 1e-12;
    }

    rng::Stream rs(seed, {40});

    // k-means++-style seeding over the positively weighted points.
    std::vector<GeoPoint> centroids;
    std::vector<char> chosen(points.size(), 0);
    {
        std::vector<double> mass(positive.size());
        for (std::size_t j = 0; j < positive.size(); ++j) mass[j] = weights[positive[j]];
        const std::size_t first = positive[sample_by_mass(mass, rs.next_unit())];
        centroids.push_back(points[first]);
        chosen[first] = 1;
        while (centroids.size() < k) {
            double total = 0.0;
            for (std::size_t j = 0; j < positive.size(); ++j) {
                const std::size_t i = positive[j];
                double best = std::numeric_limits<double>::infinity();
                for (const GeoPoint c : centroids) {
                    const double dx = c.x - points[i].x;
                    const double dy = c.y - points[i].y;
                    best = std::min(best, dx * dx + dy * dy);
                }
                mass[j] = chosen[i] ? 0.0 : weights[i] * best;
                total += mass[j];
            }
            std::size_t pick = positive.size();
            if (total > 0.0) {
                pick = sample_by_mass(mass, rs.next_unit());
                if (chosen[positive[pick]]) pick = positive.size();
            }
            if (pick == positive.size()) {
                // All remaining mass sits on already chosen locations; take
                // the lowest-index unchosen positive point.
                for (std::size_t j = 0; j < positive.size(); ++j)
                    if (!chosen[positive[j]]) {
                        pick = j;
                        break;
                    }
            }
            centroids.push_back(points[positive[pick]]);
            chosen[positive[pick]] = 1;
        }
    }

    SoA pts;
    pts.from(points);
    KmeansResult res;
    res.labels.assign(points.size(), 0);
    std::vector<double> cx(k), cy(k);
    double prev_inertia = std::numeric_limits<double>::infinity();

    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t c = 0; c < k; ++c) {
            cx[c] = centroids[c].x;
            cy[c] = centroids[c].y;
        }
        res.inertia = kernels::assign_points(pts.xs.data(), pts.ys.data(), weights.data(),
                                             points.size(), cx.data(), cy.data(), k,
                                             res.labels.data());
        res.iterations = iter + 1;
        if (res.inertia > prev_inertia * (1.0 + 1e-12) + 1e-9)
            throw std::logic_error("weighted_kmeans: inertia increased across iterations");
        prev_inertia = res.inertia;

        // Weighted means in fixed index order.
        std::vector<double> sx(k, 0.0), sy(k, 0.0), sw(k, 0.0);
        for (std::size_t i : positive) {
            const std::uint32_t c = res.labels[i];
            sx[c] += weights[i] * points[i].x;
            sy[c] += weights[i] * points[i].y;
            sw[c] += weights[i];
        }

        double max_move = 0.0;
        bool repaired = false;
        for (std::size_t c = 0; c < k; ++c) {
            GeoPoint next;
            if (sw[c] > 0.0) {
                next = {sx[c] / sw[c], sy[c] / sw[c]};
            } else {
                // Empty cluster: re-seed at the positively weighted point
                // with the largest weighted distance to its centroid.
                double worst = -1.0;
                std::size_t pick = positive[0];
                for (std::size_t i : positive) {
                    const std::uint32_t l = res.labels[i];
                    const double dx = cx[l] - points[i].x;
                    const double dy = cy[l] - points[i].y;
                    const double score = weights[i] * (dx * dx + dy * dy);
                    if (score > worst) {
                        worst = score;
                        pick = i;
                    }
                }
                next = points[pick];
                repaired = true;
            }
            max_move = std::max(max_move, dist(centroids[c], next));
            centroids[c] = next;
        }
        if (!repaired && max_move < tol) break;
    }

    res.centroids = std::move(centroids);
    return res;
}

std::string to_string(ScenarioTag tag) {
    switch (tag) {
        case ScenarioTag::C3: return "C3";
        case ScenarioTag::H1: return "H1";
        case ScenarioTag::H3: return "H3";
        case ScenarioTag::H9: return "H9";
    }
    return "?";
}

ScenarioTag scenario_tag_from_string(const std::string& s) {
    if (s == "C3") return ScenarioTag::C3;
    if (s == "H1") return ScenarioTag::H1;
    if (s == "H3") return ScenarioTag::H3;
    if (s == "H9") return ScenarioTag::H9;
    throw InvalidParameterError("unknown scenario tag: " + s);
}

namespace {

std::vector<std::uint32_t> map_aps_to_mdcs(const std::vector<GeoPoint>& aps,
                                           const std::vector<GeoPoint>& mdcs) {
    std::vector<std::uint32_t> out;
    out.reserve(aps.size());
    for (const GeoPoint ap : aps)
        out.push_back(static_cast<std::uint32_t>(nearest_index(ap, mdcs)));
    return out;
}

}  // namespace

Placement place(const PresenceGrid& grid, std::size_t n_aps, std::size_t n_mdcs,
                std::uint64_t seed) {
    std::vector<GeoPoint> centers;
    std::vector<double> weights;
    for (int iy = 0; iy < grid.resolution; ++iy)
        for (int ix = 0; ix < grid.resolution; ++ix)
            if (grid.value(ix, iy) > 0.0) {
                centers.push_back(grid.cell_center(ix, iy));
                weights.push_back(grid.value(ix, iy));
            }

    Placement p;
    p.tag = ScenarioTag::C3;
    p.aps = weighted_kmeans(centers, weights, n_aps, rng::derive(seed, {20})).centroids;
    p.mdcs = weighted_kmeans(centers, weights, n_mdcs, rng::derive(seed, {21})).centroids;
    p.ap_to_mdc = map_aps_to_mdcs(p.aps, p.mdcs);
    return p;
}

Placement derive_scenario(const Placement& base, const ScenarioMap& map, ScenarioTag tag) {
    if (base.tag != ScenarioTag::C3)
        throw InvalidParameterError("derive_scenario requires a C3 base placement");
    if (map.hospitals.empty()) throw InvalidParameterError("map has no hospitals");

    Placement p;
    p.aps = base.aps;
    p.tag = tag;
    switch (tag) {
        case ScenarioTag::C3:
            return base;
        case ScenarioTag::H1:
            p.mdcs = {map.hospitals[nearest_index(map.bounds.center(), map.hospitals)]};
            break;
        case ScenarioTag::H3:
            for (const GeoPoint mdc : base.mdcs) {
                const GeoPoint h = map.hospitals[nearest_index(mdc, map.hospitals)];
                if (std::find(p.mdcs.begin(), p.mdcs.end(), h) == p.mdcs.end())
                    p.mdcs.push_back(h);
            }
            break;
        case ScenarioTag::H9:
            p.mdcs = map.hospitals;
            break;
    }
    p.ap_to_mdc = map_aps_to_mdcs(p.aps, p.mdcs);
    return p;
}

void write_placement(const Placement& p, const std::filesystem::path& path) {
    json j;
    j["schema"] = 1;
    j["scenario_tag"] = to_string(p.tag);
    j["aps"] = json::array();
    for (const GeoPoint a : p.aps) j["aps"].push_back({a.x, a.y});
    j["mdcs"] = json::array();
    for (const GeoPoint m : p.mdcs) j["mdcs"].push_back({m.x, m.y});
    j["ap_to_mdc"] = p.ap_to_mdc;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write placement file: " + path.string());
    f << j.dump(2) << '\n';
}

Placement load_placement(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open placement file: " + path.string());
    json j;
    try {
        f >> j;
        Placement p;
        p.tag = scenario_tag_from_string(j.at("scenario_tag").get<std::string>());
        for (const auto& a : j.at("aps")) p.aps.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
        for (const auto& m : j.at("mdcs")) p.mdcs.push_back({m.at(0).get<double>(), m.at(1).get<double>()});
        p.ap_to_mdc = j.at("ap_to_mdc").get<std::vector<std::uint32_t>>();
        if (p.ap_to_mdc.size() != p.aps.size())
            throw std::runtime_error("placement file " + path.string() + ": ap_to_mdc size mismatch");
        return p;
    } catch (const json::exception& e) {
        throw std::runtime_error("malformed placement file " + path.string() + ": " + e.what());
    }
}

}  // namespace mdcsim
