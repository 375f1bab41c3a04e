#pragma once

#include <map>
#include <string>
#include <vector>

#include "mobipred/dates.hpp"
#include "mobipred/diag.hpp"
#include "mobipred/ingest.hpp"

namespace mobipred::fusion {

using ingest::LocationSample;
using ingest::Platform;
using ingest::WifiEvent;

struct ApLocation {
    std::string ap_id;
    double latitude = 0.0;
    double longitude = 0.0;
    int support_count = 0;  // matched (associate event, GPS fix) pairs
};

enum class WindowSource { gps, wifi };

struct ValidityWindow {
    EpochSeconds start = 0;
    EpochSeconds end = 0;  // exclusive
    double latitude = 0.0;
    double longitude = 0.0;
    WindowSource source = WindowSource::gps;
};

struct MinutePoint {
    EpochSeconds minute = 0;  // whole-minute UTC boundary
    double latitude = 0.0;
    double longitude = 0.0;
    WindowSource source = WindowSource::gps;
};

struct MinuteTrack {
    std::string user_id;
    std::vector<MinutePoint> points;
    int days_with_data = 0;  // distinct local days holding >= 1 point
    std::size_t sample_count = 0;
    int tz_offset_s = 0;
};

// Validity durations and local-time rules. iOS applies the T_W family to GPS
// points as well; Android applies T_G to GPS and T_W to WiFi.
struct FusionPolicy {
    std::int64_t t_g_android_s = 15 * 60;
    std::int64_t t_w_day_weekday_s = 4 * 3600;
    std::int64_t t_w_day_weekend_s = 6 * 3600;
    std::int64_t t_w_night_s = 8 * 3600;
    int day_start_minute = 6 * 60;  // local, inclusive
    int day_end_minute = 22 * 60;   // local, exclusive
    std::int64_t ap_window_s = 5 * 60;

    // Validity duration for a point at utc with the given source.
    std::int64_t duration_for(Platform platform, WindowSource source, EpochSeconds utc,
                              int tz_offset_s) const;
};

// Mean of GPS fixes within +/- ap_window_s of each associate event, per AP.
// A fix near k events contributes k times. APs with no matched fix are
// absent from the map.
std::map<std::string, ApLocation> localize_access_points(const std::vector<LocationSample>& gps,
                                                         const std::vector<WifiEvent>& events,
                                                         const FusionPolicy& policy);

// Merges GPS samples and localized WiFi associate points into time-ordered
// validity windows [t_i, min(t_i + T, t_{i+1})); WiFi windows are further
// clipped at an intervening dissociate for the same AP. On a timestamp tie
// the GPS point wins. The last point keeps its full duration.
std::vector<ValidityWindow> build_validity_windows(const std::vector<LocationSample>& samples,
                                                   const std::map<std::string, ApLocation>& ap_locs,
                                                   const std::vector<WifiEvent>& events,
                                                   Platform platform, int tz_offset_s,
                                                   const FusionPolicy& policy,
                                                   DiagLog* diag = nullptr);

// One point per whole-minute boundary m with start <= m < end, carrying the
// window's coordinates unchanged.
MinuteTrack resample_minute_grid(const std::string& user_id,
                                 const std::vector<ValidityWindow>& windows, int tz_offset_s);

struct FusionResult {
    std::map<std::string, ApLocation> ap_locations;
    std::vector<ValidityWindow> windows;
    MinuteTrack track;
};

// Full per-user chain: AP localization, validity windows, minute grid.
// Expects accuracy-filtered GPS samples.
FusionResult fuse_user(const std::string& user_id, const std::vector<LocationSample>& gps,
                       const std::vector<WifiEvent>& events, Platform platform, int tz_offset_s,
                       const FusionPolicy& policy, DiagLog* diag = nullptr);

}  // namespace mobipred::fusion
