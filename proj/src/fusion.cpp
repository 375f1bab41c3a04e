#include "mobipred/fusion.hpp"

#include <algorithm>
#include <cstdlib>

namespace mobipred::fusion {

std::int64_t FusionPolicy::duration_for(Platform platform, WindowSource source, EpochSeconds utc,
                                        int tz_offset_s) const {
    if (platform == Platform::android && source == WindowSource::gps) return t_g_android_s;
    int minute = local_minute_of_day(utc, tz_offset_s);
    if (minute < day_start_minute || minute >= day_end_minute) return t_w_night_s;
    return is_weekend(local_day(utc, tz_offset_s)) ? t_w_day_weekend_s : t_w_day_weekday_s;
}

std::map<std::string, ApLocation> localize_access_points(const std::vector<LocationSample>& gps,
                                                         const std::vector<WifiEvent>& events,
                                                         const FusionPolicy& policy) {
    struct Acc {
        double lat_sum = 0.0, lon_sum = 0.0;
        int count = 0;
    };
    std::map<std::string, Acc> accs;

    for (const auto& e : events) {
        if (e.kind != ingest::WifiEventKind::associate) continue;
        EpochSeconds lo = e.timestamp - policy.ap_window_s;
        EpochSeconds hi = e.timestamp + policy.ap_window_s;
        auto first = std::lower_bound(gps.begin(), gps.end(), lo,
                                      [](const LocationSample& s, EpochSeconds t) {
                                          return s.timestamp < t;
                                      });
        Acc& acc = accs[e.ap_id];
        for (auto it = first; it != gps.end() && it->timestamp <= hi; ++it) {
            acc.lat_sum += it->latitude;
            acc.lon_sum += it->longitude;
            acc.count += 1;
        }
    }

    std::map<std::string, ApLocation> out;
    for (const auto& [ap, acc] : accs) {
        if (acc.count == 0) continue;
        out[ap] = ApLocation{ap, acc.lat_sum / acc.count, acc.lon_sum / acc.count, acc.count};
    }
    return out;
}

namespace {

struct Point {
    EpochSeconds t = 0;
    double lat = 0.0, lon = 0.0;
    WindowSource source = WindowSource::gps;
    const std::string* ap_id = nullptr;  // wifi points only
};

}  // namespace

std::vector<ValidityWindow> build_validity_windows(const std::vector<LocationSample>& samples,
                                                   const std::map<std::string, ApLocation>& ap_locs,
                                                   const std::vector<WifiEvent>& events,
                                                   Platform platform, int tz_offset_s,
                                                   const FusionPolicy& policy, DiagLog* diag) {
    std::vector<Point> points;
    points.reserve(samples.size() + events.size());
    for (const auto& s : samples)
        points.push_back({s.timestamp, s.latitude, s.longitude, WindowSource::gps, nullptr});
    for (const auto& e : events) {
        if (e.kind != ingest::WifiEventKind::associate) continue;
        auto it = ap_locs.find(e.ap_id);
        if (it == ap_locs.end()) {
            if (diag) diag->note("unlocalized_ap", "ap=" + e.ap_id);
            continue;
        }
        points.push_back(
            {e.timestamp, it->second.latitude, it->second.longitude, WindowSource::wifi, &e.ap_id});
    }

    std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
        if (a.t != b.t) return a.t < b.t;
        return a.source == WindowSource::gps && b.source == WindowSource::wifi;
    });
    // On a timestamp tie the GPS point sorts first; the tied WiFi point is
    // dropped so per-user point times stay strictly increasing.
    std::vector<Point> merged;
    merged.reserve(points.size());
    for (const auto& p : points) {
        if (!merged.empty() && merged.back().t == p.t) {
            if (diag) diag->note("timestamp_tie", "gps point kept at t=" + std::to_string(p.t));
            continue;
        }
        merged.push_back(p);
    }

    // Dissociate times per AP, for clipping wifi windows.
    std::map<std::string, std::vector<EpochSeconds>> dissoc;
    for (const auto& e : events)
        if (e.kind == ingest::WifiEventKind::dissociate) dissoc[e.ap_id].push_back(e.timestamp);

    std::vector<ValidityWindow> windows;
    windows.reserve(merged.size());
    for (std::size_t i = 0; i < merged.size(); ++i) {
        const Point& p = merged[i];
        std::int64_t T = policy.duration_for(platform, p.source, p.t, tz_offset_s);
        EpochSeconds end = p.t + T;
        if (i + 1 < merged.size()) end = std::min(end, merged[i + 1].t);
        if (p.source == WindowSource::wifi && p.ap_id) {
            auto it = dissoc.find(*p.ap_id);
            if (it != dissoc.end()) {
                auto d = std::upper_bound(it->second.begin(), it->second.end(), p.t);
                if (d != it->second.end()) end = std::min(end, *d);
            }
        }
        if (end <= p.t) continue;
        windows.push_back({p.t, end, p.lat, p.lon, p.source});
    }
    return windows;
}

MinuteTrack resample_minute_grid(const std::string& user_id,
                                 const std::vector<ValidityWindow>& windows, int tz_offset_s) {
    MinuteTrack track;
    track.user_id = user_id;
    track.tz_offset_s = tz_offset_s;

    EpochDay prev_day = 0;
    bool have_day = false;
    for (const auto& w : windows) {
        EpochSeconds m = floor_div(w.start + 59, 60) * 60;  // first boundary >= start
        for (; m < w.end; m += 60) {
            track.points.push_back({m, w.latitude, w.longitude, w.source});
            // Windows are time-ordered, so local days arrive non-decreasing.
            EpochDay d = local_day(m, tz_offset_s);
            if (!have_day || d != prev_day) {
                track.days_with_data += 1;
                prev_day = d;
                have_day = true;
            }
        }
    }
    track.sample_count = track.points.size();
    return track;
}

FusionResult fuse_user(const std::string& user_id, const std::vector<LocationSample>& gps,
                       const std::vector<WifiEvent>& events, Platform platform, int tz_offset_s,
                       const FusionPolicy& policy, DiagLog* diag) {
    FusionResult r;
    r.ap_locations = localize_access_points(gps, events, policy);
    r.windows =
        build_validity_windows(gps, r.ap_locations, events, platform, tz_offset_s, policy, diag);
    r.track = resample_minute_grid(user_id, r.windows, tz_offset_s);
    return r;
}

}  // namespace mobipred::fusion
