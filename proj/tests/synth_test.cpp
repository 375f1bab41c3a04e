#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mobipred/geo.hpp"
#include "mobipred/synth.hpp"

using namespace mobipred;
using doctest::Contains;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const char* tag) {
    fs::path dir = fs::temp_directory_path() / (std::string("mobipred_synth_") + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Pins every outing probability to zero so the user never leaves home.
synth::CohortSpec homebound_spec() {
    synth::CohortSpec spec;
    spec.n_android = 1;
    spec.n_ios = 0;
    spec.n_weeks = 1;
    spec.routine.base_work_prob = 0.0;
    spec.routine.base_errand_prob = 0.0;
    spec.routine.weekend_out_prob = 0.0;
    spec.routine.out_prob_user_sd = 0.0;
    spec.sampler.gps_noise_m = 0.0;
    spec.sampler.missing_hour_prob = 0.0;
    return spec;
}

const synth::LatentRow& latent_at(const synth::SynthCohort& c, const std::string& user,
                                  int week) {
    for (const auto& row : c.latent)
        if (row.user_id == user && row.week == week) return row;
    REQUIRE(false);
    return c.latent.front();
}

}  // namespace

TEST_CASE("homebound user yields a constant fixed-rate track") {
    synth::CohortSpec spec = homebound_spec();
    synth::SynthCohort synth_cohort = synth::generate_cohort(spec, 7);
    const ingest::RawCohort& c = synth_cohort.cohort;

    REQUIRE(c.users.size() == 1);
    const auto& [user, info] = *c.users.begin();
    CHECK(user == "a001");
    CHECK(info.platform == ingest::Platform::android);
    CHECK(info.tz_offset_s == -21600);

    // One extra calendar day past the last rated week, 144 fixes per day.
    auto fixes = c.locations_for(user);
    REQUIRE(fixes.size() == (7 * 1 + 1) * 144);

    // Local midnight of the start day in UTC.
    EpochSeconds t0 = static_cast<EpochSeconds>(spec.start_day) * kSecondsPerDay -
                      spec.tz_offset_s;
    CHECK(fixes.front().timestamp == t0);
    for (std::size_t i = 0; i < fixes.size(); ++i) {
        CHECK(fixes[i].timestamp == t0 + static_cast<EpochSeconds>(i) * 600);
        CHECK(fixes[i].latitude == fixes[0].latitude);
        CHECK(fixes[i].longitude == fixes[0].longitude);
        CHECK(fixes[i].accuracy_m >= 5.0);
        CHECK(fixes[i].accuracy_m <= 40.0);
    }

    // Baseline survey on day zero, one weekly score, no rating weeks yet.
    auto qids = c.qids_for(user);
    REQUIRE(qids.size() == 2);
    CHECK(qids[0].is_baseline);
    CHECK(qids[0].date == spec.start_day);
    CHECK(qids[0].score >= 11);
    CHECK(qids[0].score <= 27);
    CHECK_FALSE(qids[1].is_baseline);
    CHECK(qids[1].date == spec.start_day + 7);
    CHECK(qids[1].score >= 0);
    CHECK(qids[1].score <= 27);
    CHECK(c.cgi.empty());

    // Latent truth covers week 0 (trivially not improved) and week 1.
    REQUIRE(synth_cohort.latent.size() == 2);
    CHECK_FALSE(latent_at(synth_cohort, user, 0).improved);

    // The home access point is held all day: alternating events, first
    // association 240 s after local midnight pinned to second :30.
    auto wifi = c.wifi_for(user);
    REQUIRE(wifi.size() >= 4);
    CHECK(wifi.front().timestamp == t0 + 270);
    for (std::size_t i = 0; i < wifi.size(); ++i) {
        CHECK(wifi[i].ap_id == user + "-ap-home");
        auto want = i % 2 == 0 ? ingest::WifiEventKind::associate
                               : ingest::WifiEventKind::dissociate;
        CHECK(wifi[i].kind == want);
    }
}

TEST_CASE("survey scores stay in range and ratings match the latent truth") {
    synth::CohortSpec spec;
    spec.n_android = 6;
    spec.n_ios = 6;
    spec.n_weeks = 6;
    synth::SynthCohort got = synth::generate_cohort(spec, 11);

    CHECK(got.latent.size() == 12u * 7u);
    for (const auto& q : got.cohort.qids) {
        CHECK(q.score <= 27);
        if (q.is_baseline) {
            CHECK(q.score >= 11);
            CHECK(q.date == spec.start_day);
        } else {
            CHECK(q.score >= 0);
            int delta = static_cast<int>(q.date - spec.start_day);
            CHECK(delta % 7 == 0);
            CHECK(delta >= 7);
            CHECK(delta <= 7 * spec.n_weeks);
        }
    }

    // Biweekly ratings; a rating of 1-2 must agree with the latent
    // improvement flag for that week (same threshold on the latent drop).
    REQUIRE(got.cohort.cgi.size() == 12u * 3u);
    for (const auto& r : got.cohort.cgi) {
        CHECK(r.cgi_i >= 1);
        CHECK(r.cgi_i <= 7);
        int week = static_cast<int>((r.date - spec.start_day) / 7);
        CHECK(week % spec.severity.cgi_period_weeks == 0);
        CHECK((r.cgi_i <= 2) == latent_at(got, r.user_id, week).improved);
    }
}

TEST_CASE("ios fixes honor the displacement trigger") {
    synth::CohortSpec spec;
    spec.n_android = 0;
    spec.n_ios = 3;
    spec.n_weeks = 2;
    spec.sampler.gps_noise_m = 0.0;
    // Guarantee commutes so every user emits more than the day-zero fix.
    spec.routine.base_work_prob = 1.0;
    spec.routine.work_prob_slope = 0.0;
    spec.routine.out_prob_user_sd = 0.0;
    synth::SynthCohort got = synth::generate_cohort(spec, 13);

    for (const auto& [user, info] : got.cohort.users) {
        CHECK(info.platform == ingest::Platform::ios);
        auto fixes = got.cohort.locations_for(user);
        REQUIRE(fixes.size() >= 10);
        for (std::size_t i = 0; i < fixes.size(); ++i) {
            // Event-driven sampling lands on whole minutes.
            CHECK(fixes[i].timestamp % 60 == 0);
            if (i == 0) continue;
            double sep_m = haversine_km({fixes[i - 1].latitude, fixes[i - 1].longitude},
                                        {fixes[i].latitude, fixes[i].longitude}) *
                           1000.0;
            // Without noise a fix only fires once displacement since the
            // previous emission reaches the minimum trigger distance.
            CHECK(sep_m >= spec.sampler.ios_min_trigger_m - 1e-6);
        }
    }
}

TEST_CASE("same spec and seed reproduce byte-identical files") {
    synth::CohortSpec spec;
    spec.n_android = 2;
    spec.n_ios = 2;
    spec.n_weeks = 2;

    fs::path dir_a = fresh_dir("repro_a");
    fs::path dir_b = fresh_dir("repro_b");
    synth::write_cohort(synth::generate_cohort(spec, 5), dir_a.string());
    synth::write_cohort(synth::generate_cohort(spec, 5), dir_b.string());

    const char* files[] = {"platforms.csv", "locations.csv", "wifi.csv",
                           "qids.csv",      "cgi.csv",       "latent_truth.csv",
                           "manifest.cfg"};
    for (const char* f : files) {
        INFO(f);
        CHECK(slurp(dir_a / f) == slurp(dir_b / f));
    }

    synth::SynthCohort other = synth::generate_cohort(spec, 6);
    fs::path dir_c = fresh_dir("repro_c");
    synth::write_cohort(other, dir_c.string());
    CHECK(slurp(dir_a / "locations.csv") != slurp(dir_c / "locations.csv"));
}

TEST_CASE("generated cohorts reload with no rejections") {
    synth::CohortSpec spec;
    spec.n_android = 3;
    spec.n_ios = 3;
    spec.n_weeks = 2;
    synth::SynthCohort got = synth::generate_cohort(spec, 9);

    fs::path dir = fresh_dir("roundtrip");
    std::string manifest = synth::write_cohort(got, dir.string());
    ingest::RawCohort back = ingest::load_cohort(manifest);

    CHECK(back.rejections.empty());
    CHECK(back.users.size() == got.cohort.users.size());
    CHECK(back.locations.size() == got.cohort.locations.size());
    CHECK(back.wifi.size() == got.cohort.wifi.size());
    CHECK(back.qids.size() == got.cohort.qids.size());
    CHECK(back.cgi.size() == got.cohort.cgi.size());
    CHECK(back.users.at("i001").platform == ingest::Platform::ios);
    CHECK(back.users.at("a001").tz_offset_s == spec.tz_offset_s);
}

TEST_CASE("recovering users leave home more as treatment progresses") {
    synth::CohortSpec spec;
    spec.n_android = 20;
    spec.n_ios = 0;
    synth::SynthCohort got = synth::generate_cohort(spec, 3);

    // Fraction of fixes more than 150 m from home (places sit >= 400 m
    // apart), per local week. The first fix lands at local midnight of day
    // zero, when everyone is home.
    auto away_frac = [&](const std::string& user, int week_lo) {
        auto fixes = got.cohort.locations_for(user);
        REQUIRE(!fixes.empty());
        LatLon home{fixes.front().latitude, fixes.front().longitude};
        int n = 0, away = 0;
        for (const auto& s : fixes) {
            auto local_day = static_cast<int>(
                floor_div(s.timestamp + spec.tz_offset_s, kSecondsPerDay) - spec.start_day);
            if (local_day < week_lo * 7 || local_day >= (week_lo + 1) * 7) continue;
            ++n;
            if (haversine_km(home, {s.latitude, s.longitude}) > 0.15) ++away;
        }
        REQUIRE(n > 0);
        return static_cast<double>(away) / n;
    };

    std::vector<double> improved_delta, stable_delta;
    for (const auto& [user, info] : got.cohort.users) {
        double delta = away_frac(user, spec.n_weeks - 1) - away_frac(user, 0);
        if (latent_at(got, user, spec.n_weeks).improved)
            improved_delta.push_back(delta);
        else
            stable_delta.push_back(delta);
    }
    REQUIRE(improved_delta.size() >= 3);
    REQUIRE(stable_delta.size() >= 3);

    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    // Recovery swings the outing probabilities hard; stable users barely move.
    CHECK(mean(improved_delta) >= 0.08);
    CHECK(mean(improved_delta) - mean(stable_delta) >= 0.05);
}

TEST_CASE("infeasible specs are refused") {
    auto expect_throw = [](synth::CohortSpec spec, const char* what) {
        CHECK_THROWS_WITH_AS(synth::generate_cohort(spec, 1), Contains(what),
                             std::runtime_error);
    };
    synth::CohortSpec weeks;
    weeks.n_weeks = 0;
    expect_throw(weeks, "at least one week");

    synth::CohortSpec nobody;
    nobody.n_android = 0;
    nobody.n_ios = 0;
    expect_throw(nobody, "no users");

    synth::CohortSpec jitter;
    jitter.sampler.android_jitter_s = jitter.sampler.android_period_s / 4.0;
    expect_throw(jitter, "jitter");

    synth::CohortSpec prob;
    prob.severity.respond_prob = 1.5;
    expect_throw(prob, "probability");

    synth::CohortSpec trigger;
    trigger.sampler.ios_min_trigger_m = 0.0;
    expect_throw(trigger, "trigger");
}
