#include "mobipred/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "mobipred/geo.hpp"
#include "mobipred/rng.hpp"

namespace mobipred::synth {

namespace {

constexpr double kMetersPerDegLat = 111320.0;
constexpr double kPi = 3.14159265358979323846;

LatLon offset_m(const LatLon& base, double north_m, double east_m) {
    LatLon p;
    p.lat = base.lat + north_m / kMetersPerDegLat;
    p.lon = base.lon + east_m / (kMetersPerDegLat * std::cos(base.lat * kPi / 180.0));
    return p;
}

double dist_m(const LatLon& a, const LatLon& b) { return haversine_km(a, b) * 1000.0; }

void validate(const CohortSpec& spec) {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw std::runtime_error(std::string("infeasible cohort spec: ") + what);
    };
    require(spec.n_android + spec.n_ios >= 1, "no users");
    require(spec.n_android >= 0 && spec.n_ios >= 0, "negative user count");
    require(spec.n_weeks >= 1, "need at least one week");
    require(spec.tz_offset_s % 60 == 0, "timezone offset must be whole minutes");
    require(spec.places.n_errands >= 0, "negative errand count");
    require(spec.places.home_radius_km > 0.0, "no places");
    require(spec.sampler.android_period_s > 0.0, "android period must be positive");
    require(spec.sampler.android_jitter_s >= 0.0 &&
                spec.sampler.android_jitter_s < spec.sampler.android_period_s / 4.0,
            "android jitter must stay below a quarter period");
    require(spec.sampler.ios_min_trigger_m > 0.0 &&
                spec.sampler.ios_min_trigger_m <= spec.sampler.ios_max_trigger_m,
            "ios trigger range");
    require(spec.sampler.gps_noise_m >= 0.0, "negative gps noise");
    require(spec.sampler.accuracy_lo_m > 0.0 &&
                spec.sampler.accuracy_lo_m <= spec.sampler.accuracy_hi_m,
            "accuracy range");
    for (double p : {spec.severity.respond_prob, spec.sampler.missing_hour_prob,
                     spec.routine.base_work_prob, spec.routine.base_errand_prob,
                     spec.routine.weekend_out_prob})
        require(p >= 0.0 && p <= 1.0, "probability outside [0,1]");
    require(spec.severity.cgi_period_weeks >= 1, "cgi period");
    require(spec.routine.speed_kmh_lo > 0.0 &&
                spec.routine.speed_kmh_lo <= spec.routine.speed_kmh_hi,
            "speed range");
    require(spec.sampler.wifi_reassoc_lo_h > 0.0 &&
                spec.sampler.wifi_reassoc_lo_h <= spec.sampler.wifi_reassoc_hi_h,
            "wifi reassociation range");
    require(spec.routine.work_start_h < spec.routine.work_end_h, "work hours");
}

// One contiguous piece of a day, in local seconds. place >= 0 is a stay at
// that place (0 home, 1 work, 2+ errands); place < 0 is a straight-line
// transit from a to b.
struct Seg {
    double t0 = 0.0, t1 = 0.0;
    LatLon a, b;
    int place = -1;
};

struct DayPlan {
    std::vector<Seg> segs;
    std::array<bool, 24> missing_hour{};

    LatLon position(double t) const {
        for (const auto& s : segs) {
            if (t < s.t1 || &s == &segs.back()) {
                if (s.place >= 0 || s.t1 <= s.t0) return s.a;
                double f = std::clamp((t - s.t0) / (s.t1 - s.t0), 0.0, 1.0);
                return {s.a.lat + f * (s.b.lat - s.a.lat), s.a.lon + f * (s.b.lon - s.a.lon)};
            }
        }
        return segs.back().b;
    }

    int place_at(double t) const {
        for (const auto& s : segs)
            if (t >= s.t0 && t < s.t1) return s.place;
        return segs.empty() ? 0 : segs.back().place;
    }

    bool hour_missing(double t) const {
        int h = std::clamp(static_cast<int>(t / 3600.0), 0, 23);
        return missing_hour[static_cast<std::size_t>(h)];
    }
};

struct UserSim {
    std::string id;
    ingest::Platform platform;
    std::vector<LatLon> places;  // 0 home, 1 work, 2.. errands
    double speed_kmh = 10.0;
    double out_prob_offset = 0.0;
    double baseline = 20.0;
    bool responder = false;
    std::vector<double> weekly_severity;

    double severity_on_day(int day, int n_weeks) const {
        int w = day / 7;
        double f = static_cast<double>(day % 7) / 7.0;
        int w1 = std::min(w + 1, n_weeks);
        double s0 = weekly_severity[static_cast<std::size_t>(std::min(w, n_weeks))];
        double s1 = weekly_severity[static_cast<std::size_t>(w1)];
        return s0 + f * (s1 - s0);
    }
};

std::vector<LatLon> draw_places(const PlaceParams& pp, Rng& rng, double ring_scale) {
    auto ring_point = [&](const LatLon& around, double lo_km, double hi_km) {
        double d = rng.uniform(lo_km, hi_km) * 1000.0 * ring_scale;
        double bearing = rng.uniform(0.0, 2.0 * kPi);
        return offset_m(around, d * std::cos(bearing), d * std::sin(bearing));
    };
    LatLon center{pp.center_lat, pp.center_lon};
    std::vector<LatLon> places;
    double r = pp.home_radius_km * 1000.0 * std::sqrt(rng.uniform());
    double theta = rng.uniform(0.0, 2.0 * kPi);
    places.push_back(offset_m(center, r * std::cos(theta), r * std::sin(theta)));

    auto add_separated = [&](double lo_km, double hi_km) {
        for (int attempt = 0; attempt < 100; ++attempt) {
            LatLon cand = ring_point(places[0], lo_km, hi_km);
            bool ok = true;
            for (const auto& p : places)
                if (dist_m(p, cand) < pp.min_separation_m * ring_scale) ok = false;
            if (ok) {
                places.push_back(cand);
                return;
            }
        }
        places.push_back(ring_point(places[0], hi_km, hi_km * 1.5));
    };
    add_separated(pp.work_dist_lo_km, pp.work_dist_hi_km);
    for (int k = 0; k < pp.n_errands; ++k)
        add_separated(pp.errand_dist_lo_km, pp.errand_dist_hi_km);
    return places;
}

// Appends a transit to `dest` departing at `depart` plus the stay that
// follows; returns the arrival time.
double travel_to(std::vector<Seg>& segs, const UserSim& u, int& cur_place, double& cursor,
                 double depart, int dest) {
    depart = std::max(depart, cursor);
    if (dest == cur_place) return depart;
    if (depart > cursor)
        segs.push_back({cursor, depart, u.places[static_cast<std::size_t>(cur_place)],
                        u.places[static_cast<std::size_t>(cur_place)], cur_place});
    double d_km = haversine_km(u.places[static_cast<std::size_t>(cur_place)],
                               u.places[static_cast<std::size_t>(dest)]);
    double dur = d_km / u.speed_kmh * 3600.0;
    segs.push_back({depart, depart + dur, u.places[static_cast<std::size_t>(cur_place)],
                    u.places[static_cast<std::size_t>(dest)], -1});
    cursor = depart + dur;
    cur_place = dest;
    return cursor;
}

DayPlan plan_day(const CohortSpec& spec, const UserSim& u, EpochDay civil_day, int day_index,
                 Rng& rng) {
    const bool ios = u.platform == ingest::Platform::ios;
    const auto& rt = spec.routine;
    double sev = u.severity_on_day(day_index, spec.n_weeks);
    double s_norm = std::clamp((sev - rt.severity_pivot_lo) /
                                   std::max(rt.severity_pivot_hi - rt.severity_pivot_lo, 1e-9),
                               0.0, 1.0);
    double outing_scale = ios ? spec.ios.errand_scale : 1.0;
    double couple = ios ? spec.ios.coupling_scale : 1.0;

    DayPlan plan;
    for (auto& h : plan.missing_hour) h = rng.bernoulli(spec.sampler.missing_hour_prob);

    double off = u.out_prob_offset;
    double work_p =
        std::clamp(rt.base_work_prob + off - rt.work_prob_slope * couple * s_norm, 0.0, 1.0);
    double errand_p = std::clamp(
        (rt.base_errand_prob + off - rt.errand_prob_slope * couple * s_norm) * outing_scale,
        0.0, 1.0);
    double weekend_p = std::clamp(
        (rt.weekend_out_prob + off - rt.weekend_out_slope * couple * s_norm) * outing_scale,
        0.0, 1.0);
    bool weekday = !is_weekend(civil_day);
    bool go_work = weekday && u.places.size() > 1 && rng.bernoulli(work_p);
    bool go_errand = weekday && u.places.size() > 2 && rng.bernoulli(errand_p);
    bool go_weekend = !weekday && u.places.size() > 2 && rng.bernoulli(weekend_p);
    std::size_t errand_idx =
        u.places.size() > 2 ? 2 + rng.below(static_cast<std::uint64_t>(u.places.size() - 2)) : 0;

    int cur_place = 0;
    double cursor = 0.0;
    if (go_work) {
        double shrink_s = ios ? spec.ios.home_extra_h * 1800.0 : 0.0;
        double start = rt.work_start_h * 3600.0 + shrink_s;
        double end = rt.work_end_h * 3600.0 - shrink_s;
        double d_km = haversine_km(u.places[0], u.places[1]);
        double depart = start - d_km / u.speed_kmh * 3600.0;
        travel_to(plan.segs, u, cur_place, cursor, depart, 1);
        travel_to(plan.segs, u, cur_place, cursor, end, 0);
    }
    double shave_min = ios ? spec.ios.outing_shave_h * 60.0 : 0.0;
    if (go_errand) {
        double stay_min = std::max(rt.errand_minutes - shave_min, 20.0);
        double depart = std::max(rt.errand_start_h * 3600.0, cursor + 900.0);
        travel_to(plan.segs, u, cur_place, cursor, depart, static_cast<int>(errand_idx));
        travel_to(plan.segs, u, cur_place, cursor, cursor + stay_min * 60.0, 0);
    }
    if (go_weekend) {
        double stay_min = std::max(rt.weekend_minutes - shave_min, 30.0);
        double depart = rt.weekend_start_h * 3600.0;
        travel_to(plan.segs, u, cur_place, cursor, depart, static_cast<int>(errand_idx));
        travel_to(plan.segs, u, cur_place, cursor, cursor + stay_min * 60.0, 0);
    }
    plan.segs.push_back({cursor, 86400.0, u.places[0], u.places[0], 0});
    return plan;
}

// Pins wifi event instants 30 s past the minute so they can never collide
// with GPS fixes, which land on :00.
std::int64_t wifi_instant(double local_s) {
    return static_cast<std::int64_t>(local_s / 60.0) * 60 + 30;
}

class UserGenerator {
  public:
    UserGenerator(const CohortSpec& spec, UserSim user, Rng rng)
        : spec_(spec), u_(std::move(user)), rng_(rng) {}

    void run(ingest::RawCohort& out) {
        const bool ios = u_.platform == ingest::Platform::ios;
        gps_sigma_ = spec_.sampler.gps_noise_m * (ios ? spec_.ios.wander_scale : 1.0);
        last_emit_ = u_.places[0];
        trigger_m_ = rng_.uniform(spec_.sampler.ios_min_trigger_m, spec_.sampler.ios_max_trigger_m);

        int n_days = spec_.n_weeks * 7 + 1;
        for (int d = 0; d < n_days; ++d) {
            EpochDay civil = spec_.start_day + d;
            day_base_utc_ = static_cast<EpochSeconds>(civil) * kSecondsPerDay -
                            spec_.tz_offset_s;
            DayPlan plan = plan_day(spec_, u_, civil, d, rng_);
            emit_wifi(plan, out);
            if (ios)
                sample_ios(plan, d == 0, out);
            else
                sample_android(plan, out);
        }
    }

  private:
    void push_fix(EpochSeconds ts, const LatLon& true_pos, ingest::RawCohort& out) {
        LatLon noisy = true_pos;
        if (gps_sigma_ > 0.0) {
            double north = rng_.gauss(0.0, gps_sigma_);
            double east = rng_.gauss(0.0, gps_sigma_);
            noisy = offset_m(true_pos, north, east);
        }
        ingest::LocationSample s;
        s.user_id = u_.id;
        s.timestamp = ts;
        s.latitude = noisy.lat;
        s.longitude = noisy.lon;
        s.accuracy_m = rng_.uniform(spec_.sampler.accuracy_lo_m, spec_.sampler.accuracy_hi_m);
        out.locations.push_back(std::move(s));
    }

    void sample_android(const DayPlan& plan, ingest::RawCohort& out) {
        double period = spec_.sampler.android_period_s;
        double jitter = spec_.sampler.android_jitter_s;
        for (double t = 0.0; t < 86400.0; t += period) {
            double at = t;
            if (jitter > 0.0) at += rng_.uniform(-jitter, jitter);
            if (at < 0.0 || at >= 86400.0 || plan.hour_missing(at)) continue;
            push_fix(day_base_utc_ + static_cast<EpochSeconds>(at), plan.position(at), out);
        }
    }

    void sample_ios(const DayPlan& plan, bool first_day, ingest::RawCohort& out) {
        for (int m = 0; m < 1440; ++m) {
            double t = m * 60.0;
            LatLon pos = plan.position(t);
            int place = plan.place_at(t);
            bool arrived = place >= 0 && place != prev_place_ && prev_place_ < 0;
            prev_place_ = place;

            double moved = dist_m(pos, last_emit_);
            bool fire = moved >= trigger_m_ ||
                        (arrived && moved >= spec_.sampler.ios_min_trigger_m) ||
                        (first_day && m == 0);
            if (!fire) continue;
            if (!plan.hour_missing(t)) {
                push_fix(day_base_utc_ + static_cast<EpochSeconds>(t), pos, out);
                last_emit_ = pos;
                trigger_m_ = rng_.uniform(spec_.sampler.ios_min_trigger_m,
                                          spec_.sampler.ios_max_trigger_m);
            }
        }
    }

    void emit_wifi(const DayPlan& plan, ingest::RawCohort& out) {
        for (const auto& seg : plan.segs) {
            if (seg.place != 0 && seg.place != 1) continue;
            double delay = spec_.sampler.wifi_assoc_delay_s;
            if (seg.t1 - seg.t0 < delay + 180.0) continue;
            std::string ap = u_.id + (seg.place == 0 ? "-ap-home" : "-ap-work");

            auto push = [&](double local_s, ingest::WifiEventKind kind) {
                ingest::WifiEvent e;
                e.user_id = u_.id;
                e.timestamp = day_base_utc_ + wifi_instant(local_s);
                e.ap_id = ap;
                e.kind = kind;
                out.wifi.push_back(std::move(e));
            };

            double t = seg.t0 + delay;
            push(t, ingest::WifiEventKind::associate);
            for (;;) {
                double gap =
                    rng_.uniform(spec_.sampler.wifi_reassoc_lo_h, spec_.sampler.wifi_reassoc_hi_h) *
                    3600.0;
                if (t + gap + 180.0 >= seg.t1 - 90.0) break;
                t += gap;
                push(t, ingest::WifiEventKind::dissociate);
                push(t + 60.0, ingest::WifiEventKind::associate);
                t += 60.0;
            }
            push(seg.t1 - 90.0, ingest::WifiEventKind::dissociate);
        }
    }

    const CohortSpec& spec_;
    UserSim u_;
    Rng rng_;
    double gps_sigma_ = 0.0;
    EpochSeconds day_base_utc_ = 0;
    LatLon last_emit_;
    double trigger_m_ = 0.0;
    int prev_place_ = 0;
};

std::string make_user_id(ingest::Platform p, int index) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%s%03d", p == ingest::Platform::android ? "a" : "i",
                  index + 1);
    return buf;
}

}  // namespace

SynthCohort generate_cohort(const CohortSpec& spec, std::uint64_t seed) {
    validate(spec);
    SynthCohort result;
    Rng master(seed);

    int total = spec.n_android + spec.n_ios;
    for (int idx = 0; idx < total; ++idx) {
        bool android = idx < spec.n_android;
        Rng rng = master.fork(static_cast<std::uint64_t>(idx));

        UserSim u;
        u.platform = android ? ingest::Platform::android : ingest::Platform::ios;
        u.id = make_user_id(u.platform, android ? idx : idx - spec.n_android);
        u.responder = rng.bernoulli(spec.severity.respond_prob);
        u.baseline = rng.uniform(spec.severity.baseline_lo, spec.severity.baseline_hi);
        u.out_prob_offset = rng.gauss(0.0, spec.routine.out_prob_user_sd);
        u.speed_kmh = rng.uniform(spec.routine.speed_kmh_lo, spec.routine.speed_kmh_hi) *
                      (android ? 1.0 : spec.ios.speed_scale);
        double ring_scale = u.platform == ingest::Platform::ios ? spec.ios.place_scale : 1.0;
        u.places = draw_places(spec.places, rng, ring_scale);

        double drift = u.responder ? spec.severity.drift_respond : spec.severity.drift_stable;
        u.weekly_severity.resize(static_cast<std::size_t>(spec.n_weeks) + 1);
        u.weekly_severity[0] = u.baseline;
        for (int w = 1; w <= spec.n_weeks; ++w)
            u.weekly_severity[static_cast<std::size_t>(w)] =
                std::clamp(u.baseline + drift * w + rng.gauss(0.0, spec.severity.noise_sd), 0.0,
                           27.0);

        ingest::UserInfo info;
        info.platform = u.platform;
        info.tz_offset_s = spec.tz_offset_s;
        result.cohort.users[u.id] = info;

        ingest::QidsRecord base;
        base.user_id = u.id;
        base.date = spec.start_day;
        base.score = std::clamp(
            static_cast<int>(std::lround(u.baseline + rng.gauss(0.0, spec.severity.qids_noise_sd))),
            11, 27);
        base.is_baseline = true;
        result.cohort.qids.push_back(base);

        for (int w = 1; w <= spec.n_weeks; ++w) {
            double sev = u.weekly_severity[static_cast<std::size_t>(w)];
            ingest::QidsRecord q;
            q.user_id = u.id;
            q.date = spec.start_day + 7 * w;
            q.score = std::clamp(
                static_cast<int>(std::lround(sev + rng.gauss(0.0, spec.severity.qids_noise_sd))),
                0, 27);
            result.cohort.qids.push_back(q);
        }

        for (int w = spec.severity.cgi_period_weeks; w <= spec.n_weeks;
             w += spec.severity.cgi_period_weeks) {
            double drop = u.baseline - u.weekly_severity[static_cast<std::size_t>(w)];
            ingest::CgiRecord c;
            c.user_id = u.id;
            c.date = spec.start_day + 7 * w;
            double thr = spec.severity.improvement_threshold;
            c.cgi_i = drop >= thr + 3.0 ? 1 : drop >= thr ? 2 : drop > 0.5 ? 3 : 4;
            result.cohort.cgi.push_back(c);
        }

        for (int w = 0; w <= spec.n_weeks; ++w) {
            LatentRow row;
            row.user_id = u.id;
            row.week = w;
            row.severity = u.weekly_severity[static_cast<std::size_t>(w)];
            row.improved =
                u.baseline - row.severity >= spec.severity.improvement_threshold;
            result.latent.push_back(row);
        }

        UserGenerator gen(spec, std::move(u), rng);
        gen.run(result.cohort);
    }

    auto by_user_ts = [](const auto& a, const auto& b) {
        if (a.user_id != b.user_id) return a.user_id < b.user_id;
        return a.timestamp < b.timestamp;
    };
    std::sort(result.cohort.locations.begin(), result.cohort.locations.end(), by_user_ts);
    std::sort(result.cohort.wifi.begin(), result.cohort.wifi.end(), by_user_ts);
    auto by_user_date = [](const auto& a, const auto& b) {
        if (a.user_id != b.user_id) return a.user_id < b.user_id;
        return a.date < b.date;
    };
    std::sort(result.cohort.qids.begin(), result.cohort.qids.end(), by_user_date);
    std::sort(result.cohort.cgi.begin(), result.cohort.cgi.end(), by_user_date);
    return result;
}

std::string write_cohort(const SynthCohort& result, const std::string& dir) {
    std::string manifest = ingest::write_cohort_csvs(result.cohort, dir);
    std::ofstream out(dir + "/latent_truth.csv");
    out << "user_id,week,severity,improved\n";
    for (const auto& row : result.latent)
        out << row.user_id << ',' << row.week << ',' << row.severity << ','
            << (row.improved ? 1 : 0) << '\n';
    return manifest;
}

}  // namespace mobipred::synth
