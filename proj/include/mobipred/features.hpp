#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mobipred/diag.hpp"
#include "mobipred/geo.hpp"
#include "mobipred/intervals.hpp"

namespace mobipred::features {

struct StayCluster {
    int cluster_id = 0;
    std::vector<std::size_t> members;  // indices into the clustered input
    LatLon centroid;
    double dwell_minutes = 0.0;  // one minute per member point
};

// The eight mobility descriptors, in canonical column order.
struct FeatureVector {
    double location_variance = 0.0;   // ln(var(lat) + var(lon)), floored
    double time_moving_frac = 0.0;    // [0,1]
    double total_distance_norm = 0.0; // km per covered day
    double avg_moving_speed = 0.0;    // km/h over moving segments
    double n_unique_locations = 0.0;  // cluster count
    double entropy = 0.0;             // nats, over cluster dwell shares
    double normalized_entropy = 0.0;  // entropy / ln(n_unique_locations)
    double time_home_frac = 0.0;      // [0,1]

    std::array<double, 8> as_array() const {
        return {location_variance, time_moving_frac,    total_distance_norm,
                avg_moving_speed,  n_unique_locations,  entropy,
                normalized_entropy, time_home_frac};
    }
};

inline constexpr std::array<const char*, 8> kFeatureNames = {
    "location_variance", "time_moving_frac",   "total_distance_norm", "avg_moving_speed",
    "n_unique_locations", "entropy",           "normalized_entropy",  "time_home_frac"};

struct FeatureParams {
    double eps_m = 20.0;
    int min_pts = 160;
    double speed_threshold_kmh = 1.0;
    double var_floor = 1e-12;
    int night_start_minute = 0;    // local, inclusive
    int night_end_minute = 6 * 60; // local, exclusive
};

struct MotionPoint {
    double speed_kmh = 0.0;
    bool is_moving = false;
};

// Outgoing speed per point via haversine / elapsed time; a point moves when
// its outgoing speed strictly exceeds the threshold. The last point inherits
// the preceding segment. Fewer than 2 points: all stationary at speed 0.
std::vector<MotionPoint> classify_motion(const std::vector<fusion::MinutePoint>& slice,
                                         double threshold_kmh = 1.0);

// Density clusters over stationary points; noise points belong to none.
std::vector<StayCluster> cluster_stationary(const std::vector<LatLon>& points, double eps_m = 20.0,
                                            int min_pts = 160);

// All eight features for one coverage-filtered interval. home_hint, when
// set, picks the home cluster nearest that coordinate instead of the
// max-night-dwell rule.
FeatureVector extract_features(const intervals::QidsInterval& interval,
                               const FeatureParams& params = {},
                               const std::optional<LatLon>& home_hint = std::nullopt,
                               DiagLog* diag = nullptr);

struct BaselineBundle {
    std::string user_id;
    std::optional<FeatureVector> location_baseline;  // empty when the first week has no data
    int qids_baseline = 0;
};

// Features over the 7 local days starting at enrollment_day, plus the
// baseline questionnaire score.
BaselineBundle extract_baseline(const fusion::MinuteTrack& track, EpochDay enrollment_day,
                                int qids_baseline, const FeatureParams& params = {},
                                DiagLog* diag = nullptr);

}  // namespace mobipred::features
