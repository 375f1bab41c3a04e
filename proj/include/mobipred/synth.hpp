#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mobipred/dates.hpp"
#include "mobipred/ingest.hpp"

namespace mobipred::synth {

// Weekly latent severity: baseline draw, linear per-week drift (responders
// vs. non-responders), clamped to the QIDS range. Reported QIDS adds noise;
// CGI-I compares the latent drop against improvement_threshold.
struct SeverityParams {
    double baseline_lo = 16.0;
    double baseline_hi = 24.0;
    double respond_prob = 0.4;
    double drift_respond = -2.3;
    double drift_stable = -0.15;
    double noise_sd = 0.5;
    double qids_noise_sd = 0.8;
    double improvement_threshold = 5.0;
    int cgi_period_weeks = 2;
};

// Place-routine day model. Severity maps to [0,1] across
// [severity_pivot_lo, severity_pivot_hi] (clamped); outing probabilities are
// the base value minus slope times that response, so recovery inside the
// pivot range swings behavior hard while floor/ceiling severities saturate.
struct RoutineParams {
    double work_start_h = 9.0;
    double work_end_h = 17.0;
    double errand_start_h = 18.5;
    double errand_minutes = 150.0;
    double weekend_start_h = 11.0;
    double weekend_minutes = 330.0;
    double severity_pivot_lo = 6.0;
    double severity_pivot_hi = 22.0;
    double base_work_prob = 0.95;
    double work_prob_slope = 0.85;
    double base_errand_prob = 0.85;
    double errand_prob_slope = 0.75;
    double weekend_out_prob = 0.9;
    double weekend_out_slope = 0.75;
    double out_prob_user_sd = 0.08;  // per-user offset on all outing probabilities
    double speed_kmh_lo = 9.0;
    double speed_kmh_hi = 14.0;
};

struct PlaceParams {
    double center_lat = 41.8781;
    double center_lon = -87.6298;
    double home_radius_km = 5.0;
    double work_dist_lo_km = 2.0;
    double work_dist_hi_km = 5.0;
    double errand_dist_lo_km = 0.6;
    double errand_dist_hi_km = 2.5;
    double min_separation_m = 400.0;
    int n_errands = 3;
};

struct SamplerParams {
    double android_period_s = 600.0;
    double android_jitter_s = 0.0;
    // A fresh trigger distance is drawn uniformly from this range after each
    // emission; the device reports only once cumulative displacement exceeds
    // it (plus an arrival fix when a move ends).
    double ios_min_trigger_m = 50.0;
    double ios_max_trigger_m = 1609.0;
    double gps_noise_m = 4.0;
    double accuracy_lo_m = 5.0;
    double accuracy_hi_m = 40.0;
    // Whole-hour location dropout, drawn independently per (user, day, hour).
    double missing_hour_prob = 0.02;
    double wifi_reassoc_lo_h = 1.5;
    double wifi_reassoc_hi_h = 3.0;
    double wifi_assoc_delay_s = 240.0;
};

// Affine distortion of the iOS-side generating process: shorter work days
// and outings, compressed place geometry, faster transit, fewer outings.
// Gives the two platforms a covariate shift an affine corrector can remove.
struct IosDistortion {
    double home_extra_h = 4.5;
    double wander_scale = 1.0;
    double speed_scale = 2.1;
    double errand_scale = 0.55;
    double place_scale = 0.55;     // compresses work/errand distances from home
    double coupling_scale = 1.0;  // attenuates the severity-to-mobility slope
    double outing_shave_h = 1.25;  // trims each errand/weekend outing duration
};

struct CohortSpec {
    int n_android = 22;
    int n_ios = 22;
    int n_weeks = 8;
    EpochDay start_day = days_from_civil(2022, 3, 7);
    int tz_offset_s = -21600;
    SeverityParams severity;
    RoutineParams routine;
    PlaceParams places;
    SamplerParams sampler;
    IosDistortion ios;
};

struct LatentRow {
    std::string user_id;
    int week = 0;
    double severity = 0.0;
    bool improved = false;
};

struct SynthCohort {
    ingest::RawCohort cohort;
    std::vector<LatentRow> latent;
};

// Deterministic under (spec, seed); per-user substreams are forked from the
// master stream by user index. Throws on an infeasible spec.
SynthCohort generate_cohort(const CohortSpec& spec, std::uint64_t seed);

// Writes the ingest CSVs plus latent_truth.csv; returns the manifest path.
std::string write_cohort(const SynthCohort& result, const std::string& dir);

}  // namespace mobipred::synth
