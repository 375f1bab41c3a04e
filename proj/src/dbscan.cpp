#include "mobipred/dbscan.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace mobipred::dbscan {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEarthRadiusM = kEarthRadiusKm * 1000.0;

struct Cell {
    std::vector<int> all;      // every point in the cell
    std::vector<int> pending;  // points not yet assigned to a cluster
};

struct Grid {
    std::unordered_map<std::uint64_t, Cell> cells;
    std::vector<double> xs, ys;
    double cell_size = 0.0;
    double eps = 0.0;
    double eps_lo2 = 0.0;  // accept without haversine below this squared
    double eps_hi2 = 0.0;  // reject without haversine above this squared
    std::int64_t reach = 2;  // cell radius covering the reject distance

    static std::uint64_t key(std::int64_t cx, std::int64_t cy) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(cx)) << 32) |
               static_cast<std::uint64_t>(static_cast<std::uint32_t>(cy));
    }

    std::int64_t cell_of(double v) const {
        return static_cast<std::int64_t>(std::floor(v / cell_size));
    }
};

// Squared distance from a point to the nearest / farthest point of a cell
// rectangle, in the projected plane.
double rect_min_dist2(double px, double py, double x0, double y0, double x1, double y1) {
    double dx = px < x0 ? x0 - px : (px > x1 ? px - x1 : 0.0);
    double dy = py < y0 ? y0 - py : (py > y1 ? py - y1 : 0.0);
    return dx * dx + dy * dy;
}

double rect_max_dist2(double px, double py, double x0, double y0, double x1, double y1) {
    double dx = std::max(std::abs(px - x0), std::abs(px - x1));
    double dy = std::max(std::abs(py - y0), std::abs(py - y1));
    return dx * dx + dy * dy;
}

}  // namespace

Result cluster(const std::vector<LatLon>& points, double eps_m, int min_pts) {
    const int n = static_cast<int>(points.size());
    Result result;
    result.labels.assign(points.size(), -1);
    if (n == 0) return result;

    double lat_min = points[0].lat, lat_max = points[0].lat;
    double lon_min = points[0].lon, lon_max = points[0].lon;
    for (const auto& p : points) {
        lat_min = std::min(lat_min, p.lat);
        lat_max = std::max(lat_max, p.lat);
        lon_min = std::min(lon_min, p.lon);
        lon_max = std::max(lon_max, p.lon);
    }
    // Data hugging the antimeridian projects contiguously after unwrapping.
    bool unwrap = (lon_max - lon_min) > 180.0;

    Grid grid;
    grid.eps = eps_m;
    grid.cell_size = eps_m / 2.0;
    double lat0 = 0.5 * (lat_min + lat_max);
    double cos0 = std::max(std::cos(lat0 * kPi / 180.0), 1e-9);

    // The projection misstates east-west distances by up to the latitude
    // span times tan(lat); pairs inside the resulting band around eps are
    // settled by exact haversine.
    double span_rad = (lat_max - lat_min) * kPi / 180.0;
    double lat_extreme = std::min(std::max(std::abs(lat_min), std::abs(lat_max)), 89.9);
    double margin = 2.0 * span_rad * std::tan(lat_extreme * kPi / 180.0) + 1e-3;
    margin = std::min(margin, 10.0);
    double lo = eps_m * std::max(1.0 - margin, 0.0);
    double hi = eps_m * (1.0 + margin);
    grid.eps_lo2 = lo * lo;
    grid.eps_hi2 = hi * hi;
    grid.reach = static_cast<std::int64_t>(std::floor(hi / grid.cell_size)) + 1;

    grid.xs.resize(points.size());
    grid.ys.resize(points.size());
    for (int i = 0; i < n; ++i) {
        double lon = points[i].lon;
        if (unwrap && lon < 0.0) lon += 360.0;
        grid.xs[i] = kEarthRadiusM * cos0 * (lon * kPi / 180.0);
        grid.ys[i] = kEarthRadiusM * (points[i].lat * kPi / 180.0);
    }
    for (int i = 0; i < n; ++i) {
        auto& cell = grid.cells[Grid::key(grid.cell_of(grid.xs[i]), grid.cell_of(grid.ys[i]))];
        cell.all.push_back(i);
        cell.pending.push_back(i);
    }

    auto in_eps = [&](int i, int j) {
        double dx = grid.xs[i] - grid.xs[j];
        double dy = grid.ys[i] - grid.ys[j];
        double d2 = dx * dx + dy * dy;
        if (d2 <= grid.eps_lo2) return true;
        if (d2 > grid.eps_hi2) return false;
        return haversine_km(points[i], points[j]) * 1000.0 <= eps_m;
    };

    // Visits every cell that can hold a neighbor of point i. Cells whose
    // rectangle is entirely within the accept radius are handed over whole;
    // the rest get a per-point distance check.
    auto for_neighbor_cells = [&](int i, auto&& whole_cell, auto&& boundary_cell) {
        std::int64_t cx = grid.cell_of(grid.xs[i]);
        std::int64_t cy = grid.cell_of(grid.ys[i]);
        for (std::int64_t dx = -grid.reach; dx <= grid.reach; ++dx) {
            for (std::int64_t dy = -grid.reach; dy <= grid.reach; ++dy) {
                auto it = grid.cells.find(Grid::key(cx + dx, cy + dy));
                if (it == grid.cells.end()) continue;
                double x0 = static_cast<double>(cx + dx) * grid.cell_size;
                double y0 = static_cast<double>(cy + dy) * grid.cell_size;
                double x1 = x0 + grid.cell_size;
                double y1 = y0 + grid.cell_size;
                if (rect_min_dist2(grid.xs[i], grid.ys[i], x0, y0, x1, y1) > grid.eps_hi2)
                    continue;
                if (rect_max_dist2(grid.xs[i], grid.ys[i], x0, y0, x1, y1) <= grid.eps_lo2)
                    whole_cell(it->second);
                else
                    boundary_cell(it->second);
            }
        }
    };

    auto is_core = [&](int i) {
        int count = 0;
        bool core = false;
        for_neighbor_cells(
            i,
            [&](Cell& c) {
                count += static_cast<int>(c.all.size());
                if (count >= min_pts) core = true;
            },
            [&](Cell& c) {
                if (core) return;
                for (int j : c.all) {
                    if (in_eps(i, j) && ++count >= min_pts) {
                        core = true;
                        break;
                    }
                }
            });
        return core;
    };

    // -2 unvisited, -1 noise (may still become a border point), >=0 cluster.
    std::vector<int>& labels = result.labels;
    std::fill(labels.begin(), labels.end(), -2);

    auto claim_pending = [&](int i, int cluster_id, std::vector<int>& out) {
        for_neighbor_cells(
            i,
            [&](Cell& c) {
                for (int j : c.pending) {
                    labels[j] = cluster_id;
                    out.push_back(j);
                }
                c.pending.clear();
            },
            [&](Cell& c) {
                std::size_t w = 0;
                for (std::size_t r = 0; r < c.pending.size(); ++r) {
                    int j = c.pending[r];
                    if (in_eps(i, j)) {
                        labels[j] = cluster_id;
                        out.push_back(j);
                    } else {
                        c.pending[w++] = j;
                    }
                }
                c.pending.resize(w);
            });
    };

    std::vector<int> frontier;
    for (int i = 0; i < n; ++i) {
        if (labels[i] != -2) continue;
        if (!is_core(i)) {
            labels[i] = -1;
            continue;
        }
        int cluster_id = result.n_clusters++;
        frontier.clear();
        claim_pending(i, cluster_id, frontier);  // includes i itself
        for (std::size_t q = 0; q < frontier.size(); ++q) {
            int j = frontier[q];
            if (j == i) continue;
            if (is_core(j)) claim_pending(j, cluster_id, frontier);
        }
    }
    for (auto& l : labels)
        if (l == -2) l = -1;
    return result;
}

}  // namespace mobipred::dbscan
