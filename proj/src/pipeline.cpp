#include "mobipred/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "mobipred/csv.hpp"

namespace fs = std::filesystem;

namespace mobipred::pipeline {

namespace {

std::vector<int> parse_int_list(const Config& cfg, const std::string& key,
                                std::vector<int> fallback) {
    if (!cfg.has(key)) return fallback;
    std::vector<int> out;
    for (const auto& tok : cfg.get_list(key)) {
        std::int64_t v = 0;
        if (!parse_int64(tok, v))
            throw std::runtime_error("config " + key + ": not an integer: " + tok);
        out.push_back(static_cast<int>(v));
    }
    if (out.empty()) throw std::runtime_error("config " + key + ": empty list");
    return out;
}

void parse_synth_spec(const Config& cfg, synth::CohortSpec& s) {
    auto d = [&](const char* key, double& field) {
        field = cfg.get_double(key, field);
    };
    auto i = [&](const char* key, int& field) {
        field = static_cast<int>(cfg.get_int(key, field));
    };
    i("synth.n_android", s.n_android);
    i("synth.n_ios", s.n_ios);
    i("synth.n_weeks", s.n_weeks);
    if (cfg.has("synth.start_date")) {
        auto day = parse_iso_date(cfg.get_string("synth.start_date", ""));
        if (!day) throw std::runtime_error("config synth.start_date: expected YYYY-MM-DD");
        s.start_day = *day;
    }
    if (cfg.has("synth.timezone")) {
        auto off = parse_utc_offset_seconds(cfg.get_string("synth.timezone", ""));
        if (!off) throw std::runtime_error("config synth.timezone: bad UTC offset");
        s.tz_offset_s = *off;
    }

    d("synth.severity.baseline_lo", s.severity.baseline_lo);
    d("synth.severity.baseline_hi", s.severity.baseline_hi);
    d("synth.severity.respond_prob", s.severity.respond_prob);
    d("synth.severity.drift_respond", s.severity.drift_respond);
    d("synth.severity.drift_stable", s.severity.drift_stable);
    d("synth.severity.noise_sd", s.severity.noise_sd);
    d("synth.severity.qids_noise_sd", s.severity.qids_noise_sd);
    d("synth.severity.improvement_threshold", s.severity.improvement_threshold);
    i("synth.severity.cgi_period_weeks", s.severity.cgi_period_weeks);

    d("synth.routine.work_start_h", s.routine.work_start_h);
    d("synth.routine.work_end_h", s.routine.work_end_h);
    d("synth.routine.errand_start_h", s.routine.errand_start_h);
    d("synth.routine.errand_minutes", s.routine.errand_minutes);
    d("synth.routine.weekend_start_h", s.routine.weekend_start_h);
    d("synth.routine.weekend_minutes", s.routine.weekend_minutes);
    d("synth.routine.severity_pivot_lo", s.routine.severity_pivot_lo);
    d("synth.routine.severity_pivot_hi", s.routine.severity_pivot_hi);
    d("synth.routine.base_work_prob", s.routine.base_work_prob);
    d("synth.routine.work_prob_slope", s.routine.work_prob_slope);
    d("synth.routine.base_errand_prob", s.routine.base_errand_prob);
    d("synth.routine.errand_prob_slope", s.routine.errand_prob_slope);
    d("synth.routine.weekend_out_prob", s.routine.weekend_out_prob);
    d("synth.routine.weekend_out_slope", s.routine.weekend_out_slope);
    d("synth.routine.out_prob_user_sd", s.routine.out_prob_user_sd);
    d("synth.routine.speed_kmh_lo", s.routine.speed_kmh_lo);
    d("synth.routine.speed_kmh_hi", s.routine.speed_kmh_hi);

    d("synth.places.center_lat", s.places.center_lat);
    d("synth.places.center_lon", s.places.center_lon);
    d("synth.places.home_radius_km", s.places.home_radius_km);
    d("synth.places.work_dist_lo_km", s.places.work_dist_lo_km);
    d("synth.places.work_dist_hi_km", s.places.work_dist_hi_km);
    d("synth.places.errand_dist_lo_km", s.places.errand_dist_lo_km);
    d("synth.places.errand_dist_hi_km", s.places.errand_dist_hi_km);
    d("synth.places.min_separation_m", s.places.min_separation_m);
    i("synth.places.n_errands", s.places.n_errands);

    d("synth.sampler.android_period_s", s.sampler.android_period_s);
    d("synth.sampler.android_jitter_s", s.sampler.android_jitter_s);
    d("synth.sampler.ios_min_trigger_m", s.sampler.ios_min_trigger_m);
    d("synth.sampler.ios_max_trigger_m", s.sampler.ios_max_trigger_m);
    d("synth.sampler.gps_noise_m", s.sampler.gps_noise_m);
    d("synth.sampler.accuracy_lo_m", s.sampler.accuracy_lo_m);
    d("synth.sampler.accuracy_hi_m", s.sampler.accuracy_hi_m);
    d("synth.sampler.missing_hour_prob", s.sampler.missing_hour_prob);
    d("synth.sampler.wifi_reassoc_lo_h", s.sampler.wifi_reassoc_lo_h);
    d("synth.sampler.wifi_reassoc_hi_h", s.sampler.wifi_reassoc_hi_h);
    d("synth.sampler.wifi_assoc_delay_s", s.sampler.wifi_assoc_delay_s);

    d("synth.ios.home_extra_h", s.ios.home_extra_h);
    d("synth.ios.wander_scale", s.ios.wander_scale);
    d("synth.ios.speed_scale", s.ios.speed_scale);
    d("synth.ios.errand_scale", s.ios.errand_scale);
    d("synth.ios.place_scale", s.ios.place_scale);
    d("synth.ios.coupling_scale", s.ios.coupling_scale);
    d("synth.ios.outing_shave_h", s.ios.outing_shave_h);
}

std::string metrics_csv_cells(const learn::Metrics& m) {
    return format_double(m.f1) + ',' + format_double(m.precision) + ',' +
           format_double(m.recall) + ',' + std::to_string(m.counts.tp) + ',' +
           std::to_string(m.counts.fp) + ',' + std::to_string(m.counts.tn) + ',' +
           std::to_string(m.counts.fn);
}

nlohmann::json metrics_json(const learn::Metrics& m) {
    return {{"f1", m.f1},
            {"precision", m.precision},
            {"recall", m.recall},
            {"tp", m.counts.tp},
            {"fp", m.counts.fp},
            {"tn", m.counts.tn},
            {"fn", m.counts.fn}};
}

}  // namespace

PipelineConfig load_pipeline_config(const Config& cfg) {
    PipelineConfig p;
    p.config_echo = cfg.entries();
    p.manifest_path = cfg.get_string("input.manifest", "");
    parse_synth_spec(cfg, p.synth_spec);

    p.max_accuracy_m = cfg.get_double("ingest.max_accuracy_m", p.max_accuracy_m);

    auto& f = p.fusion_policy;
    f.t_g_android_s = cfg.get_int("fusion.t_g_android_s", f.t_g_android_s);
    f.t_w_day_weekday_s = cfg.get_int("fusion.t_w_day_weekday_s", f.t_w_day_weekday_s);
    f.t_w_day_weekend_s = cfg.get_int("fusion.t_w_day_weekend_s", f.t_w_day_weekend_s);
    f.t_w_night_s = cfg.get_int("fusion.t_w_night_s", f.t_w_night_s);
    f.day_start_minute = static_cast<int>(cfg.get_int("fusion.day_start_minute", f.day_start_minute));
    f.day_end_minute = static_cast<int>(cfg.get_int("fusion.day_end_minute", f.day_end_minute));
    f.ap_window_s = cfg.get_int("fusion.ap_window_s", f.ap_window_s);

    p.coverage_min_days = static_cast<int>(cfg.get_int("coverage.min_days", p.coverage_min_days));
    p.coverage_min_samples = static_cast<std::size_t>(
        cfg.get_int("coverage.min_samples", static_cast<std::int64_t>(p.coverage_min_samples)));

    auto& fp = p.feature_params;
    fp.eps_m = cfg.get_double("features.eps_m", fp.eps_m);
    fp.min_pts = static_cast<int>(cfg.get_int("features.min_pts", fp.min_pts));
    fp.speed_threshold_kmh = cfg.get_double("features.speed_threshold_kmh", fp.speed_threshold_kmh);
    fp.var_floor = cfg.get_double("features.var_floor", fp.var_floor);
    fp.night_start_minute =
        static_cast<int>(cfg.get_int("features.night_start_minute", fp.night_start_minute));
    fp.night_end_minute =
        static_cast<int>(cfg.get_int("features.night_end_minute", fp.night_end_minute));

    auto& l = p.learn_cfg;
    l.c_exponents = parse_int_list(cfg, "learn.c_exponents", {-15, -10, -5, 0, 5, 10, 15});
    l.gamma_exponents = parse_int_list(cfg, "learn.gamma_exponents", {-15, -10, -5, 0, 5, 10, 15});
    if (cfg.has("learn.feature_counts")) {
        std::string raw = cfg.get_string("learn.feature_counts", "");
        if (raw == "sweep") {
            l.feature_counts.clear();
        } else {
            l.feature_counts.clear();
            for (int v : parse_int_list(cfg, "learn.feature_counts", {0}))
                l.feature_counts.push_back(static_cast<std::size_t>(std::max(v, 0)));
        }
    } else {
        l.feature_counts = {0};
    }
    l.svm_tol = cfg.get_double("learn.svm_tol", l.svm_tol);
    l.svm_max_iter = cfg.get_int("learn.svm_max_iter", l.svm_max_iter);
    l.coral_lambda = cfg.get_double("adapt.lambda", l.coral_lambda);
    l.balance_target = static_cast<std::size_t>(
        cfg.get_int("balance.target", static_cast<std::int64_t>(l.balance_target)));
    l.balance_minority_factor =
        static_cast<int>(cfg.get_int("balance.minority_factor", l.balance_minority_factor));
    l.balance_global_factor = cfg.get_double("balance.global_factor", l.balance_global_factor);
    l.nested_cv = cfg.get_bool("learn.nested_cv", l.nested_cv);
    l.macro_f1 = cfg.get_bool("learn.macro_f1", l.macro_f1);

    std::vector<std::string> scen_tokens = cfg.get_list("eval.scenarios");
    if (scen_tokens.empty()) scen_tokens = {"all"};
    for (const auto& tok : scen_tokens) {
        if (tok == "all") {
            p.scenarios.assign(learn::kAllScenarios.begin(), learn::kAllScenarios.end());
            continue;
        }
        auto s = learn::parse_scenario(tok);
        if (!s) throw std::runtime_error("config eval.scenarios: unknown scenario: " + tok);
        p.scenarios.push_back(*s);
    }
    if (p.scenarios.empty()) throw std::runtime_error("config eval.scenarios: empty scenario list");

    std::vector<std::string> mode_tokens = cfg.get_list("eval.modes");
    if (mode_tokens.empty())
        mode_tokens = {"none", "android_transformed", "ios_transformed", "dual_transformed"};
    for (const auto& tok : mode_tokens) {
        auto m = learn::parse_adapt_mode(tok);
        if (!m) throw std::runtime_error("config eval.modes: unknown mode: " + tok);
        p.modes.push_back(*m);
    }

    p.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
    p.out_dir = cfg.get_string("out_dir", p.out_dir);
    return p;
}

std::array<std::string, learn::kCanonicalDim> canonical_column_names() {
    std::array<std::string, learn::kCanonicalDim> names;
    for (std::size_t i = 0; i < 8; ++i) {
        names[i] = features::kFeatureNames[i];
        names[i + 8] = std::string("baseline_") + features::kFeatureNames[i];
    }
    names[16] = "qids";
    names[17] = "qids_baseline";
    return names;
}

Pipeline::Pipeline(PipelineConfig cfg) : cfg_(std::move(cfg)) {}

void Pipeline::acquire_cohort() {
    if (!cfg_.manifest_path.empty()) {
        cohort_ = ingest::load_cohort(cfg_.manifest_path);
        for (const auto& r : cohort_.rejections)
            diag_.note("ingest_rejection",
                       r.file + ":" + std::to_string(r.line) + " " + r.reason);
    } else {
        synth::SynthCohort generated = synth::generate_cohort(cfg_.synth_spec, cfg_.seed);
        cohort_ = std::move(generated.cohort);
        latent_ = std::move(generated.latent);
    }
    stage_log_.push_back("ingest: users=" + std::to_string(cohort_.users.size()) +
                         " locations=" + std::to_string(cohort_.locations.size()) +
                         " wifi=" + std::to_string(cohort_.wifi.size()) +
                         " qids=" + std::to_string(cohort_.qids.size()) +
                         " cgi=" + std::to_string(cohort_.cgi.size()) +
                         " rejections=" + std::to_string(cohort_.rejections.size()));
}

void Pipeline::fuse_all() {
    std::size_t windows = 0, minutes = 0, dropped = 0;
    for (const auto& [user, info] : cohort_.users) {
        auto gps = cohort_.locations_for(user);
        std::size_t before = gps.size();
        gps = ingest::filter_gps_accuracy(std::move(gps), cfg_.max_accuracy_m);
        if (before != gps.size()) {
            dropped += before - gps.size();
            diag_.note("accuracy_filtered",
                       "user=" + user + " dropped=" + std::to_string(before - gps.size()));
        }
        fusion::FusionResult fr = fusion::fuse_user(user, gps, cohort_.wifi_for(user),
                                                    info.platform, info.tz_offset_s,
                                                    cfg_.fusion_policy, &diag_);
        windows += fr.windows.size();
        minutes += fr.track.points.size();
        fused_[user] = std::move(fr);
    }
    stage_log_.push_back("fusion: users=" + std::to_string(fused_.size()) +
                         " windows=" + std::to_string(windows) +
                         " minute_points=" + std::to_string(minutes) +
                         " accuracy_dropped=" + std::to_string(dropped));
}

void Pipeline::build_table() {
    std::vector<intervals::QidsInterval> labeled;
    std::size_t built = 0;
    std::map<std::string, features::BaselineBundle> baselines;

    for (const auto& [user, info] : cohort_.users) {
        auto qids = cohort_.qids_for(user);
        const ingest::QidsRecord* baseline = nullptr;
        for (const auto& q : qids)
            if (q.is_baseline) baseline = &q;
        if (!baseline) {
            diag_.exclude("no_baseline_qids", user);
            continue;
        }
        const auto& track = fused_.at(user).track;
        auto built_user = intervals::build_qids_intervals(track, qids);
        built += built_user.size();
        if (built_user.empty()) {
            diag_.exclude("no_intervals", user);
            continue;
        }
        auto labeled_user = intervals::label_intervals(std::move(built_user),
                                                       cohort_.cgi_for(user), baseline->date,
                                                       &diag_);
        if (labeled_user.empty()) {
            diag_.exclude("no_labeled_intervals", user);
            continue;
        }
        baselines[user] = features::extract_baseline(track, baseline->date, baseline->score,
                                                     cfg_.feature_params, &diag_);
        std::move(labeled_user.begin(), labeled_user.end(), std::back_inserter(labeled));
    }

    intervals::CoverageResult cov = intervals::apply_coverage_filter(
        std::move(labeled), cfg_.coverage_min_days, cfg_.coverage_min_samples, &diag_);

    std::size_t no_baseline_rows = 0;
    for (const auto& iv : cov.kept) {
        const auto& bundle = baselines.at(iv.user_id);
        if (!bundle.location_baseline) {
            no_baseline_rows += 1;
            continue;  // the missing-baseline exclusion was logged per user
        }
        IntervalRecord rec;
        rec.user_id = iv.user_id;
        rec.platform = cohort_.users.at(iv.user_id).platform;
        rec.end_date = iv.end_date;
        rec.qids_score = iv.qids_score;
        rec.days_with_data = iv.days_with_data;
        rec.sample_count = iv.sample_count;
        rec.label = iv.label;
        rec.interval_features = features::extract_features(iv, cfg_.feature_params, std::nullopt,
                                                           &diag_);
        rec.baseline_features = *bundle.location_baseline;
        rec.qids_baseline = bundle.qids_baseline;

        adapt::FeatureRow row;
        row.user_id = rec.user_id;
        row.platform = rec.platform;
        row.label = rec.label == intervals::Label::improved ? +1 : -1;
        row.values.reserve(learn::kCanonicalDim);
        for (double v : rec.interval_features.as_array()) row.values.push_back(v);
        for (double v : rec.baseline_features.as_array()) row.values.push_back(v);
        row.values.push_back(static_cast<double>(rec.qids_score));
        row.values.push_back(static_cast<double>(rec.qids_baseline));
        table_.matrix.rows.push_back(std::move(row));
        table_.records.push_back(std::move(rec));
    }
    stage_log_.push_back("features: intervals_built=" + std::to_string(built) +
                         " kept=" + std::to_string(cov.kept.size()) +
                         " coverage_excluded_users=" + std::to_string(cov.excluded_users.size()) +
                         " missing_baseline_rows=" + std::to_string(no_baseline_rows) +
                         " rows=" + std::to_string(table_.records.size()));
}

std::vector<EvaluationRow> Pipeline::evaluate(const std::vector<learn::AdaptMode>& modes) {
    if (table_.matrix.rows.empty())
        throw std::runtime_error("evaluate: no feature rows survived the pipeline");
    std::vector<EvaluationRow> rows;
    for (learn::Scenario scenario : cfg_.scenarios) {
        for (learn::AdaptMode mode : modes) {
            EvaluationRow row;
            row.scenario = scenario;
            row.mode = mode;
            row.result = learn::louo_cross_validate(table_.matrix, scenario, mode,
                                                    cfg_.learn_cfg, cfg_.seed, &diag_);
            rows.push_back(std::move(row));
        }
    }
    stage_log_.push_back("evaluate: results=" + std::to_string(rows.size()));
    return rows;
}

std::vector<learn::CorrelationRow> Pipeline::correlations() const {
    std::vector<std::array<double, 8>> feats;
    std::vector<double> qids;
    std::vector<int> labels;
    for (const auto& rec : table_.records) {
        feats.push_back(rec.interval_features.as_array());
        qids.push_back(static_cast<double>(rec.qids_score));
        labels.push_back(rec.label == intervals::Label::improved ? +1 : -1);
    }
    return learn::correlation_table(feats, qids, labels);
}

std::vector<std::pair<learn::AdaptMode, adapt::AdaptationDiagnostics>>
Pipeline::adaptation_report() const {
    std::vector<std::pair<learn::AdaptMode, adapt::AdaptationDiagnostics>> out;
    adapt::FeatureMatrix sub_a, sub_i;
    for (const auto& row : table_.matrix.rows) {
        adapt::FeatureRow r = row;
        r.values.resize(learn::kLocationColumns);
        (row.platform == ingest::Platform::android ? sub_a : sub_i).rows.push_back(std::move(r));
    }
    if (sub_a.size() < 2 || sub_i.size() < 2) return out;
    double lambda = cfg_.learn_cfg.coral_lambda;
    for (learn::AdaptMode mode :
         {learn::AdaptMode::android_transformed, learn::AdaptMode::ios_transformed,
          learn::AdaptMode::dual_transformed}) {
        adapt::AdaptationModel model;
        if (mode == learn::AdaptMode::android_transformed)
            model = adapt::coral_fit(sub_a, sub_i, lambda);
        else if (mode == learn::AdaptMode::ios_transformed)
            model = adapt::coral_fit(sub_i, sub_a, lambda);
        else
            model = adapt::dual_coral_fit(sub_a, sub_i, lambda);
        out.emplace_back(mode, adapt::adaptation_diagnostics(sub_a, sub_i, model));
    }
    return out;
}

void write_features_csv(const FeatureTable& table, const std::string& path) {
    std::ofstream out(path);
    out << "user_id,platform,end_date,label";
    for (const auto& name : canonical_column_names()) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < table.records.size(); ++i) {
        const auto& rec = table.records[i];
        out << rec.user_id << ',' << ingest::platform_name(rec.platform) << ','
            << format_iso_date(rec.end_date) << ',' << intervals::label_name(rec.label);
        for (double v : table.matrix.rows[i].values) out << ',' << format_double(v);
        out << '\n';
    }
}

void write_intervals_csv(const FeatureTable& table, const std::string& path) {
    std::ofstream out(path);
    out << "user_id,platform,end_date,qids,days_with_data,sample_count,label\n";
    for (const auto& rec : table.records)
        out << rec.user_id << ',' << ingest::platform_name(rec.platform) << ','
            << format_iso_date(rec.end_date) << ',' << rec.qids_score << ','
            << rec.days_with_data << ',' << rec.sample_count << ','
            << intervals::label_name(rec.label) << '\n';
}

void write_windows_csv(const std::map<std::string, fusion::FusionResult>& fused,
                       const std::string& path) {
    std::ofstream out(path);
    out << "user_id,start,end,lat,lon,source\n";
    for (const auto& [user, fr] : fused)
        for (const auto& w : fr.windows)
            out << user << ',' << w.start << ',' << w.end << ',' << format_double(w.latitude)
                << ',' << format_double(w.longitude) << ','
                << (w.source == fusion::WindowSource::gps ? "gps" : "wifi") << '\n';
}

void write_track_csv(const std::map<std::string, fusion::FusionResult>& fused,
                     const std::string& path) {
    std::ofstream out(path);
    out << "user_id,minute,lat,lon,source\n";
    for (const auto& [user, fr] : fused)
        for (const auto& p : fr.track.points)
            out << user << ',' << p.minute << ',' << format_double(p.latitude) << ','
                << format_double(p.longitude) << ','
                << (p.source == fusion::WindowSource::gps ? "gps" : "wifi") << '\n';
}

void write_ap_csv(const std::map<std::string, fusion::FusionResult>& fused,
                  const std::string& path) {
    std::ofstream out(path);
    out << "user_id,ap_id,lat,lon,support_count\n";
    for (const auto& [user, fr] : fused)
        for (const auto& [ap, loc] : fr.ap_locations)
            out << user << ',' << ap << ',' << format_double(loc.latitude) << ','
                << format_double(loc.longitude) << ',' << loc.support_count << '\n';
}

void write_correlations_csv(const std::vector<learn::CorrelationRow>& rows,
                            const std::string& path) {
    std::ofstream out(path);
    out << "feature,stratum,available,r,p\n";
    for (const auto& row : rows) {
        out << row.feature << ',' << row.stratum << ',' << (row.available ? 1 : 0) << ',';
        if (row.available)
            out << format_double(row.r) << ',' << format_double(row.p);
        else
            out << ',';
        out << '\n';
    }
}

void write_exclusions_log(const DiagLog& diag, const std::string& path) {
    std::ofstream out(path);
    for (const auto& line : diag.lines()) out << line << '\n';
}

void write_report_json(const Pipeline& pipe, const std::vector<EvaluationRow>& results,
                       const std::string& path) {
    nlohmann::json doc;
    doc["config"] = pipe.config().config_echo;
    doc["stages"] = pipe.stage_log();
    doc["exclusions"] = pipe.diag().lines().size();
    auto names = canonical_column_names();
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : results) {
        nlohmann::json j;
        j["scenario"] = learn::scenario_name(row.scenario);
        j["mode"] = learn::adapt_mode_name(row.mode);
        j["overall"] = metrics_json(row.result.overall);
        j["android_only"] = metrics_json(row.result.android_only);
        j["ios_only"] = metrics_json(row.result.ios_only);
        j["chosen"] = {{"c_exp", row.result.chosen_c_exp},
                       {"gamma_exp", row.result.chosen_gamma_exp},
                       {"m", row.result.chosen_m}};
        nlohmann::json selected = nlohmann::json::array();
        auto cols = learn::scenario_columns(row.scenario);
        for (std::size_t local : row.result.selected_features)
            if (local < cols.size()) selected.push_back(names[cols[local]]);
        j["selected_features"] = selected;
        j["n_folds"] = row.result.n_folds;
        j["skipped_folds"] = row.result.skipped_folds;
        j["leakage_violations"] = row.result.leakage_violations;
        rows.push_back(std::move(j));
    }
    doc["results"] = rows;
    std::ofstream out(path);
    out << doc.dump(2) << '\n';
}

void write_mode_comparison_csv(const std::vector<EvaluationRow>& results,
                               const std::string& path) {
    std::ofstream out(path);
    out << "scenario,mode,f1,precision,recall,tp,fp,tn,fn,android_f1,ios_f1,"
           "chosen_c_exp,chosen_gamma_exp,chosen_m,n_folds,skipped_folds,leakage_violations\n";
    for (const auto& row : results)
        out << learn::scenario_name(row.scenario) << ',' << learn::adapt_mode_name(row.mode)
            << ',' << metrics_csv_cells(row.result.overall) << ','
            << format_double(row.result.android_only.f1) << ','
            << format_double(row.result.ios_only.f1) << ',' << row.result.chosen_c_exp << ','
            << row.result.chosen_gamma_exp << ',' << row.result.chosen_m << ','
            << row.result.n_folds << ',' << row.result.skipped_folds << ','
            << row.result.leakage_violations << '\n';
}

namespace {

int run_impl(const PipelineConfig& cfg, bool comparison,
             std::vector<EvaluationRow>* out_results) {
    fs::create_directories(cfg.out_dir);
    Pipeline pipe(cfg);
    std::string stage = "config";
    try {
        stage = "ingest";
        pipe.acquire_cohort();
        stage = "fusion";
        pipe.fuse_all();
        stage = "features";
        pipe.build_table();
        stage = "evaluate";
        auto results = pipe.evaluate(cfg.modes);

        stage = "artifacts";
        fs::path base(cfg.out_dir);
        write_features_csv(pipe.table(), (base / "features.csv").string());
        write_intervals_csv(pipe.table(), (base / "intervals.csv").string());
        write_correlations_csv(pipe.correlations(), (base / "correlations.csv").string());
        {
            std::ofstream out(base / "adaptation_diag.csv");
            out << "mode,pre_frobenius,post_frobenius\n";
            for (const auto& [mode, d] : pipe.adaptation_report())
                out << learn::adapt_mode_name(mode) << ',' << format_double(d.pre_frobenius)
                    << ',' << format_double(d.post_frobenius) << '\n';
        }
        if (comparison)
            write_mode_comparison_csv(results, (base / "mode_comparison.csv").string());
        write_report_json(pipe, results, (base / "report.json").string());
        write_exclusions_log(pipe.diag(), (base / "exclusions.log").string());
        if (out_results) *out_results = std::move(results);
        return 0;
    } catch (const std::exception& e) {
        // Flag partial artifacts before propagating.
        std::ofstream marker(fs::path(cfg.out_dir) / "FAILED");
        marker << "stage=" << stage << " error=" << e.what() << '\n';
        write_exclusions_log(pipe.diag(), (fs::path(cfg.out_dir) / "exclusions.log").string());
        throw std::runtime_error("stage " + stage + ": " + e.what());
    }
}

}  // namespace

int run_pipeline(const PipelineConfig& cfg, std::vector<EvaluationRow>* out_results) {
    return run_impl(cfg, false, out_results);
}

int compare_modes(const PipelineConfig& cfg, std::vector<EvaluationRow>* out_results) {
    if (cfg.modes.size() < 2)
        throw std::runtime_error("compare-modes: need at least 2 modes in eval.modes");
    return run_impl(cfg, true, out_results);
}

}  // namespace mobipred::pipeline
