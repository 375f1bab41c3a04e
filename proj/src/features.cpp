#include "mobipred/features.hpp"

#include <algorithm>
#include <cmath>

#include "mobipred/dbscan.hpp"

namespace mobipred::features {

std::vector<MotionPoint> classify_motion(const std::vector<fusion::MinutePoint>& slice,
                                         double threshold_kmh) {
    std::vector<MotionPoint> out(slice.size());
    if (slice.size() < 2) return out;
    for (std::size_t i = 0; i + 1 < slice.size(); ++i) {
        double km = haversine_km(slice[i].latitude, slice[i].longitude, slice[i + 1].latitude,
                                 slice[i + 1].longitude);
        double hours = static_cast<double>(slice[i + 1].minute - slice[i].minute) / 3600.0;
        double speed = km / hours;
        out[i] = {speed, speed > threshold_kmh};
    }
    out.back() = out[slice.size() - 2];
    return out;
}

std::vector<StayCluster> cluster_stationary(const std::vector<LatLon>& points, double eps_m,
                                            int min_pts) {
    auto r = dbscan::cluster(points, eps_m, min_pts);
    std::vector<StayCluster> clusters(r.n_clusters);
    for (int c = 0; c < r.n_clusters; ++c) clusters[c].cluster_id = c;
    for (std::size_t i = 0; i < points.size(); ++i) {
        int l = r.labels[i];
        if (l < 0) continue;
        clusters[l].members.push_back(i);
        clusters[l].centroid.lat += points[i].lat;
        clusters[l].centroid.lon += points[i].lon;
    }
    for (auto& c : clusters) {
        c.dwell_minutes = static_cast<double>(c.members.size());
        if (!c.members.empty()) {
            c.centroid.lat /= c.dwell_minutes;
            c.centroid.lon /= c.dwell_minutes;
        }
    }
    return clusters;
}

FeatureVector extract_features(const intervals::QidsInterval& interval,
                               const FeatureParams& params,
                               const std::optional<LatLon>& home_hint, DiagLog* diag) {
    FeatureVector f;
    const auto& slice = interval.track_slice;
    const std::size_t n = slice.size();
    if (n == 0) {
        f.location_variance = std::log(params.var_floor);
        return f;
    }

    double lat_mean = 0.0, lon_mean = 0.0;
    for (const auto& p : slice) {
        lat_mean += p.latitude;
        lon_mean += p.longitude;
    }
    lat_mean /= static_cast<double>(n);
    lon_mean /= static_cast<double>(n);
    double var_sum = 0.0;
    for (const auto& p : slice) {
        var_sum += (p.latitude - lat_mean) * (p.latitude - lat_mean) +
                   (p.longitude - lon_mean) * (p.longitude - lon_mean);
    }
    f.location_variance = std::log(std::max(var_sum / static_cast<double>(n), params.var_floor));

    auto motion = classify_motion(slice, params.speed_threshold_kmh);
    std::size_t moving_points = 0;
    for (const auto& m : motion) moving_points += m.is_moving ? 1 : 0;
    f.time_moving_frac = static_cast<double>(moving_points) / static_cast<double>(n);

    double total_km = 0.0, moving_speed_sum = 0.0;
    std::size_t moving_segments = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        total_km += haversine_km(slice[i].latitude, slice[i].longitude, slice[i + 1].latitude,
                                 slice[i + 1].longitude);
        if (motion[i].is_moving) {
            moving_speed_sum += motion[i].speed_kmh;
            moving_segments += 1;
        }
    }
    f.total_distance_norm =
        interval.days_with_data > 0 ? total_km / interval.days_with_data : 0.0;
    f.avg_moving_speed =
        moving_segments > 0 ? moving_speed_sum / static_cast<double>(moving_segments) : 0.0;

    std::vector<LatLon> stationary;
    std::vector<std::size_t> stationary_idx;  // back-reference into the slice
    stationary.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!motion[i].is_moving) {
            stationary.push_back({slice[i].latitude, slice[i].longitude});
            stationary_idx.push_back(i);
        }
    }
    auto clusters = cluster_stationary(stationary, params.eps_m, params.min_pts);
    f.n_unique_locations = static_cast<double>(clusters.size());

    double total_dwell = 0.0;
    for (const auto& c : clusters) total_dwell += c.dwell_minutes;
    if (total_dwell > 0.0) {
        for (const auto& c : clusters) {
            double p = c.dwell_minutes / total_dwell;
            f.entropy -= p * std::log(p);
        }
    }
    f.normalized_entropy =
        clusters.size() > 1 ? f.entropy / std::log(static_cast<double>(clusters.size())) : 0.0;

    int home = -1;
    if (home_hint && !clusters.empty()) {
        double best = 0.0;
        for (const auto& c : clusters) {
            double d = haversine_km(c.centroid, *home_hint);
            if (home < 0 || d < best) {
                home = c.cluster_id;
                best = d;
            }
        }
    } else {
        double best_night = 0.0;
        for (const auto& c : clusters) {
            double night = 0.0;
            for (std::size_t m : c.members) {
                int minute = local_minute_of_day(slice[stationary_idx[m]].minute,
                                                 interval.tz_offset_s);
                if (minute >= params.night_start_minute && minute < params.night_end_minute)
                    night += 1.0;
            }
            if (night > best_night) {
                home = c.cluster_id;
                best_night = night;
            }
        }
    }
    if (home >= 0) {
        f.time_home_frac = clusters[home].dwell_minutes / static_cast<double>(n);
    } else if (diag) {
        diag->note("no_home_cluster", "user=" + interval.user_id +
                                          " end_date=" + format_iso_date(interval.end_date));
    }
    return f;
}

BaselineBundle extract_baseline(const fusion::MinuteTrack& track, EpochDay enrollment_day,
                                int qids_baseline, const FeatureParams& params, DiagLog* diag) {
    BaselineBundle b;
    b.user_id = track.user_id;
    b.qids_baseline = qids_baseline;
    auto week = intervals::slice_days(track, enrollment_day, enrollment_day + 6);
    if (week.track_slice.empty()) {
        if (diag) diag->exclude("missing_location_baseline", track.user_id, "no first-week data");
        return b;
    }
    b.location_baseline = extract_features(week, params, std::nullopt, diag);
    return b;
}

}  // namespace mobipred::features
