#include "mobipred/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "mobipred/config.hpp"
#include "mobipred/csv.hpp"

namespace mobipred::ingest {

namespace fs = std::filesystem;

std::string platform_name(Platform p) {
    return p == Platform::android ? "android" : "ios";
}

std::optional<Platform> parse_platform(const std::string& s) {
    if (s == "android") return Platform::android;
    if (s == "ios") return Platform::ios;
    return std::nullopt;
}

namespace {

template <typename T>
std::vector<T> slice_user(const std::vector<T>& records, const std::string& user_id) {
    std::vector<T> out;
    for (const auto& r : records)
        if (r.user_id == user_id) out.push_back(r);
    return out;
}

struct Loader {
    RawCohort cohort;

    void reject(const std::string& file, std::size_t line, const std::string& reason) {
        cohort.rejections.push_back({file, line, reason});
    }

    void load_platforms(const std::string& path, int default_tz) {
        CsvFile csv = read_csv(path);
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            std::size_t line = csv.line_numbers[i];
            if (row.size() < 2 || row[0].empty()) {
                reject(path, line, "malformed platform row");
                continue;
            }
            auto platform = parse_platform(row[1]);
            if (!platform) {
                reject(path, line, "unknown platform '" + row[1] + "'");
                continue;
            }
            int tz = default_tz;
            if (row.size() >= 3 && !row[2].empty()) {
                auto parsed = parse_utc_offset_seconds(row[2]);
                if (!parsed) {
                    reject(path, line, "bad timezone '" + row[2] + "'");
                    continue;
                }
                tz = *parsed;
            }
            if (cohort.users.count(row[0])) {
                reject(path, line, "duplicate platform entry for user " + row[0]);
                continue;
            }
            cohort.users[row[0]] = UserInfo{*platform, tz};
        }
    }

    void load_locations(const std::string& path) {
        CsvFile csv = read_csv(path);
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            std::size_t line = csv.line_numbers[i];
            if (row.size() != 5) {
                reject(path, line, "expected 5 fields");
                continue;
            }
            LocationSample s;
            s.user_id = row[0];
            double lat, lon, acc;
            if (s.user_id.empty() || !parse_int64(row[1], s.timestamp)) {
                reject(path, line, "bad user or timestamp");
                continue;
            }
            if (!parse_double(row[2], lat) || !parse_double(row[3], lon) || !parse_double(row[4], acc)) {
                reject(path, line, "non-numeric coordinate or accuracy");
                continue;
            }
            if (!(lat >= -90.0 && lat <= 90.0)) {
                reject(path, line, "latitude out of range");
                continue;
            }
            if (!(lon >= -180.0 && lon <= 180.0)) {
                reject(path, line, "longitude out of range");
                continue;
            }
            if (!std::isfinite(acc) || acc < 0.0) {
                reject(path, line, "accuracy out of range");
                continue;
            }
            s.latitude = lat;
            s.longitude = lon;
            s.accuracy_m = acc;
            s.source = LocationSource::gps;
            cohort.locations.push_back(std::move(s));
        }
        dedup_locations(path);
    }

    // Collapses exact duplicates, then enforces strictly increasing per-user
    // timestamps by keeping the first row in file order for each instant.
    void dedup_locations(const std::string& path) {
        std::vector<std::size_t> order(cohort.locations.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const auto& x = cohort.locations[a];
            const auto& y = cohort.locations[b];
            if (x.user_id != y.user_id) return x.user_id < y.user_id;
            return x.timestamp < y.timestamp;
        });
        std::vector<LocationSample> kept;
        kept.reserve(order.size());
        for (std::size_t idx : order) {
            const auto& s = cohort.locations[idx];
            if (!kept.empty() && kept.back().user_id == s.user_id &&
                kept.back().timestamp == s.timestamp) {
                const auto& prev = kept.back();
                bool exact = prev.latitude == s.latitude && prev.longitude == s.longitude &&
                             prev.accuracy_m == s.accuracy_m;
                reject(path, 0, exact ? "duplicate row for user " + s.user_id
                                      : "duplicate timestamp for user " + s.user_id);
                continue;
            }
            kept.push_back(s);
        }
        cohort.locations = std::move(kept);
    }

    void load_wifi(const std::string& path) {
        CsvFile csv = read_csv(path);
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            std::size_t line = csv.line_numbers[i];
            if (row.size() != 4) {
                reject(path, line, "expected 4 fields");
                continue;
            }
            WifiEvent e;
            e.user_id = row[0];
            e.ap_id = row[2];
            if (e.user_id.empty() || e.ap_id.empty() || !parse_int64(row[1], e.timestamp)) {
                reject(path, line, "bad user, ap or timestamp");
                continue;
            }
            if (row[3] == "associate") {
                e.kind = WifiEventKind::associate;
            } else if (row[3] == "dissociate") {
                e.kind = WifiEventKind::dissociate;
            } else {
                reject(path, line, "unknown wifi event kind '" + row[3] + "'");
                continue;
            }
            cohort.wifi.push_back(std::move(e));
        }
        std::stable_sort(cohort.wifi.begin(), cohort.wifi.end(),
                         [](const WifiEvent& a, const WifiEvent& b) {
                             if (a.user_id != b.user_id) return a.user_id < b.user_id;
                             return a.timestamp < b.timestamp;
                         });
        // Exact duplicates collapse; consecutive same-kind events per
        // (user, ap) keep the first so associate/dissociate alternate.
        std::vector<WifiEvent> kept;
        std::map<std::pair<std::string, std::string>, WifiEventKind> last_kind;
        for (const auto& e : cohort.wifi) {
            auto key = std::make_pair(e.user_id, e.ap_id);
            auto it = last_kind.find(key);
            if (it != last_kind.end() && it->second == e.kind) {
                reject(path, 0, "non-alternating wifi event for user " + e.user_id + " ap " + e.ap_id);
                continue;
            }
            last_kind[key] = e.kind;
            kept.push_back(e);
        }
        cohort.wifi = std::move(kept);
    }

    void load_qids(const std::string& path) {
        CsvFile csv = read_csv(path);
        std::set<std::string> baseline_seen;
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            std::size_t line = csv.line_numbers[i];
            if (row.size() != 4) {
                reject(path, line, "expected 4 fields");
                continue;
            }
            QidsRecord r;
            r.user_id = row[0];
            auto date = parse_iso_date(row[1]);
            std::int64_t score;
            if (r.user_id.empty() || !date || !parse_int64(row[2], score)) {
                reject(path, line, "bad user, date or score");
                continue;
            }
            if (score < 0 || score > 27) {
                reject(path, line, "qids score out of range");
                continue;
            }
            if (row[3] != "0" && row[3] != "1") {
                reject(path, line, "is_baseline must be 0 or 1");
                continue;
            }
            r.date = *date;
            r.score = static_cast<int>(score);
            r.is_baseline = row[3] == "1";
            if (r.is_baseline) {
                if (baseline_seen.count(r.user_id)) {
                    reject(path, line, "second baseline record for user " + r.user_id);
                    continue;
                }
                if (r.score < 11) {
                    reject(path, line, "baseline qids below 11");
                    continue;
                }
                baseline_seen.insert(r.user_id);
            }
            cohort.qids.push_back(std::move(r));
        }
        std::stable_sort(cohort.qids.begin(), cohort.qids.end(),
                         [](const QidsRecord& a, const QidsRecord& b) {
                             if (a.user_id != b.user_id) return a.user_id < b.user_id;
                             return a.date < b.date;
                         });
    }

    void load_cgi(const std::string& path) {
        CsvFile csv = read_csv(path);
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const auto& row = csv.rows[i];
            std::size_t line = csv.line_numbers[i];
            if (row.size() != 3) {
                reject(path, line, "expected 3 fields");
                continue;
            }
            CgiRecord r;
            r.user_id = row[0];
            auto date = parse_iso_date(row[1]);
            std::int64_t v;
            if (r.user_id.empty() || !date || !parse_int64(row[2], v)) {
                reject(path, line, "bad user, date or value");
                continue;
            }
            if (v < 1 || v > 7) {
                reject(path, line, "cgi-i out of range");
                continue;
            }
            r.date = *date;
            r.cgi_i = static_cast<int>(v);
            cohort.cgi.push_back(std::move(r));
        }
        std::stable_sort(cohort.cgi.begin(), cohort.cgi.end(),
                         [](const CgiRecord& a, const CgiRecord& b) {
                             if (a.user_id != b.user_id) return a.user_id < b.user_id;
                             return a.date < b.date;
                         });
    }

    void check_platform_coverage() {
        std::set<std::string> seen;
        for (const auto& s : cohort.locations) seen.insert(s.user_id);
        for (const auto& e : cohort.wifi) seen.insert(e.user_id);
        for (const auto& r : cohort.qids) seen.insert(r.user_id);
        for (const auto& r : cohort.cgi) seen.insert(r.user_id);
        for (const auto& u : seen) {
            if (!cohort.users.count(u))
                throw std::runtime_error("user '" + u + "' has records but no platform entry");
        }
    }
};

}  // namespace

std::vector<LocationSample> RawCohort::locations_for(const std::string& user_id) const {
    return slice_user(locations, user_id);
}
std::vector<WifiEvent> RawCohort::wifi_for(const std::string& user_id) const {
    return slice_user(wifi, user_id);
}
std::vector<QidsRecord> RawCohort::qids_for(const std::string& user_id) const {
    return slice_user(qids, user_id);
}
std::vector<CgiRecord> RawCohort::cgi_for(const std::string& user_id) const {
    return slice_user(cgi, user_id);
}

RawCohort load_cohort(const std::string& manifest_path) {
    std::ifstream probe(manifest_path);
    if (!probe) throw std::runtime_error("cannot open manifest: " + manifest_path);
    probe.close();

    Config manifest = Config::from_file(manifest_path);
    fs::path base = fs::path(manifest_path).parent_path();
    auto resolve = [&](const std::string& key) {
        std::string v = manifest.get_string(key, "");
        if (v.empty()) throw std::runtime_error("manifest missing key '" + key + "'");
        fs::path p(v);
        return (p.is_absolute() ? p : base / p).string();
    };

    int default_tz = 0;
    if (manifest.has("default_timezone")) {
        auto tz = parse_utc_offset_seconds(manifest.get_string("default_timezone", ""));
        if (!tz) throw std::runtime_error("manifest default_timezone is invalid");
        default_tz = *tz;
    }

    Loader loader;
    loader.load_platforms(resolve("platforms"), default_tz);
    loader.load_locations(resolve("locations"));
    loader.load_wifi(resolve("wifi"));
    loader.load_qids(resolve("qids"));
    loader.load_cgi(resolve("cgi"));
    loader.check_platform_coverage();
    return std::move(loader.cohort);
}

std::vector<LocationSample> filter_gps_accuracy(std::vector<LocationSample> samples,
                                                double max_error_m) {
    std::vector<LocationSample> out;
    out.reserve(samples.size());
    for (auto& s : samples)
        if (s.accuracy_m <= max_error_m) out.push_back(std::move(s));
    return out;
}

std::string write_cohort_csvs(const RawCohort& cohort, const std::string& dir) {
    fs::create_directories(dir);
    fs::path base(dir);

    {
        std::ofstream out(base / "platforms.csv");
        out << "user_id,platform,timezone\n";
        for (const auto& [user, info] : cohort.users)
            out << user << ',' << platform_name(info.platform) << ','
                << format_utc_offset(info.tz_offset_s) << '\n';
    }
    {
        std::ofstream out(base / "locations.csv");
        out << "user_id,timestamp,lat,lon,accuracy_m\n";
        for (const auto& s : cohort.locations)
            out << s.user_id << ',' << s.timestamp << ',' << format_double(s.latitude) << ','
                << format_double(s.longitude) << ',' << format_double(s.accuracy_m) << '\n';
    }
    {
        std::ofstream out(base / "wifi.csv");
        out << "user_id,timestamp,ap_id,kind\n";
        for (const auto& e : cohort.wifi)
            out << e.user_id << ',' << e.timestamp << ',' << e.ap_id << ','
                << (e.kind == WifiEventKind::associate ? "associate" : "dissociate") << '\n';
    }
    {
        std::ofstream out(base / "qids.csv");
        out << "user_id,date,score,is_baseline\n";
        for (const auto& r : cohort.qids)
            out << r.user_id << ',' << format_iso_date(r.date) << ',' << r.score << ','
                << (r.is_baseline ? 1 : 0) << '\n';
    }
    {
        std::ofstream out(base / "cgi.csv");
        out << "user_id,date,cgi_i\n";
        for (const auto& r : cohort.cgi)
            out << r.user_id << ',' << format_iso_date(r.date) << ',' << r.cgi_i << '\n';
    }

    fs::path manifest = base / "manifest.cfg";
    {
        std::ofstream out(manifest);
        out << "locations=locations.csv\n"
            << "wifi=wifi.csv\n"
            << "qids=qids.csv\n"
            << "cgi=cgi.csv\n"
            << "platforms=platforms.csv\n";
    }
    return manifest.string();
}

}  // namespace mobipred::ingest
