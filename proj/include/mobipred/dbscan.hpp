#pragma once

#include <vector>

#include "mobipred/geo.hpp"

namespace mobipred::dbscan {

struct Result {
    // Per input point: -1 noise, otherwise a cluster id in [0, n_clusters).
    // Ids follow discovery order (ascending index of each cluster's first
    // core point), so results are reproducible and permutation-stable up to
    // relabeling.
    std::vector<int> labels;
    int n_clusters = 0;
};

// Density clustering over geographic points with haversine distances.
// A point is core when at least min_pts points (itself included) lie within
// eps_m meters. Uses a projected grid index as an exact prefilter: distances
// near the eps boundary fall back to haversine, so output matches a plain
// O(n^2) haversine implementation.
Result cluster(const std::vector<LatLon>& points, double eps_m, int min_pts);

}  // namespace mobipred::dbscan
