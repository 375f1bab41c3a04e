#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobipred/dates.hpp"

namespace mobipred::ingest {

enum class Platform { android, ios };

std::string platform_name(Platform p);
std::optional<Platform> parse_platform(const std::string& s);

enum class LocationSource { gps, wifi_derived };

struct LocationSample {
    std::string user_id;
    EpochSeconds timestamp = 0;
    double latitude = 0.0;
    double longitude = 0.0;
    double accuracy_m = 0.0;
    LocationSource source = LocationSource::gps;
};

enum class WifiEventKind { associate, dissociate };

struct WifiEvent {
    std::string user_id;
    EpochSeconds timestamp = 0;
    std::string ap_id;
    WifiEventKind kind = WifiEventKind::associate;
};

struct QidsRecord {
    std::string user_id;
    EpochDay date = 0;
    int score = 0;
    bool is_baseline = false;
};

struct CgiRecord {
    std::string user_id;
    EpochDay date = 0;
    int cgi_i = 0;
};

struct UserInfo {
    Platform platform = Platform::android;
    int tz_offset_s = 0;
};

struct Rejection {
    std::string file;
    std::size_t line = 0;
    std::string reason;
};

// Parsed cohort. Record vectors are sorted by (user_id, timestamp/date) and
// deduplicated; per-user location timestamps are strictly increasing.
struct RawCohort {
    std::map<std::string, UserInfo> users;
    std::vector<LocationSample> locations;
    std::vector<WifiEvent> wifi;
    std::vector<QidsRecord> qids;
    std::vector<CgiRecord> cgi;
    std::vector<Rejection> rejections;

    std::vector<LocationSample> locations_for(const std::string& user_id) const;
    std::vector<WifiEvent> wifi_for(const std::string& user_id) const;
    std::vector<QidsRecord> qids_for(const std::string& user_id) const;
    std::vector<CgiRecord> cgi_for(const std::string& user_id) const;
};

// Manifest is a flat key=path file with keys locations, wifi, qids, cgi,
// platforms and optional default_timezone. Relative paths resolve against
// the manifest's directory. Throws on missing files or a user that has
// records but no platform entry; malformed rows become rejections.
RawCohort load_cohort(const std::string& manifest_path);

// Keeps samples with accuracy_m <= max_error_m, order preserved.
std::vector<LocationSample> filter_gps_accuracy(std::vector<LocationSample> samples,
                                                double max_error_m = 165.0);

// Writes the cohort back out in the canonical CSV formats plus a manifest.
// Returns the manifest path.
std::string write_cohort_csvs(const RawCohort& cohort, const std::string& dir);

}  // namespace mobipred::ingest
