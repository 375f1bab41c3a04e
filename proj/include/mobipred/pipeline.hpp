#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobipred/adapt.hpp"
#include "mobipred/config.hpp"
#include "mobipred/diag.hpp"
#include "mobipred/features.hpp"
#include "mobipred/fusion.hpp"
#include "mobipred/ingest.hpp"
#include "mobipred/intervals.hpp"
#include "mobipred/learn.hpp"
#include "mobipred/synth.hpp"

namespace mobipred::pipeline {

// Everything a run needs, resolved from the flat key=value config. All
// measurement constants are config keys so sensitivity studies need no code
// change.
struct PipelineConfig {
    std::string manifest_path;  // empty: generate the synthetic cohort
    synth::CohortSpec synth_spec;
    double max_accuracy_m = 165.0;
    fusion::FusionPolicy fusion_policy;
    int coverage_min_days = 5;
    std::size_t coverage_min_samples = 2000;
    features::FeatureParams feature_params;
    learn::LearnConfig learn_cfg;
    std::vector<learn::Scenario> scenarios;
    std::vector<learn::AdaptMode> modes;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::map<std::string, std::string> config_echo;  // raw entries, for the report
};

// Throws on unknown scenario or mode names, an empty scenario list, or an
// empty mode list. The scenario token "all" expands to every scenario.
PipelineConfig load_pipeline_config(const Config& cfg);

// Canonical 18-column layout used by the learner: the eight interval
// features, the eight baseline-week features, the interval QIDS score and
// the baseline QIDS score.
std::array<std::string, learn::kCanonicalDim> canonical_column_names();

struct IntervalRecord {
    std::string user_id;
    ingest::Platform platform = ingest::Platform::android;
    EpochDay end_date = 0;
    int qids_score = 0;
    int days_with_data = 0;
    std::size_t sample_count = 0;
    intervals::Label label = intervals::Label::unlabeled;
    features::FeatureVector interval_features;
    features::FeatureVector baseline_features;
    int qids_baseline = 0;
};

struct FeatureTable {
    adapt::FeatureMatrix matrix;          // canonical columns, labels +/-1
    std::vector<IntervalRecord> records;  // parallel to matrix.rows
};

struct EvaluationRow {
    learn::Scenario scenario = learn::Scenario::all;
    learn::AdaptMode mode = learn::AdaptMode::none;
    learn::LouoResult result;
};

// Stage-sequential orchestration: acquire -> fuse -> table -> evaluate.
// Each stage appends a row-count line to stage_log; every excluded user or
// interval lands in diag exactly once.
class Pipeline {
  public:
    explicit Pipeline(PipelineConfig cfg);

    void acquire_cohort();
    void fuse_all();
    void build_table();
    // Runs every configured scenario against the given modes.
    std::vector<EvaluationRow> evaluate(const std::vector<learn::AdaptMode>& modes);

    std::vector<learn::CorrelationRow> correlations() const;
    // Covariance alignment quality per non-trivial mode on the full table.
    std::vector<std::pair<learn::AdaptMode, adapt::AdaptationDiagnostics>> adaptation_report()
        const;

    const PipelineConfig& config() const { return cfg_; }
    const ingest::RawCohort& cohort() const { return cohort_; }
    const std::vector<synth::LatentRow>& latent() const { return latent_; }
    const std::map<std::string, fusion::FusionResult>& fused() const { return fused_; }
    const FeatureTable& table() const { return table_; }
    DiagLog& diag() { return diag_; }
    const DiagLog& diag() const { return diag_; }
    const std::vector<std::string>& stage_log() const { return stage_log_; }

  private:
    PipelineConfig cfg_;
    ingest::RawCohort cohort_;
    std::vector<synth::LatentRow> latent_;
    std::map<std::string, fusion::FusionResult> fused_;
    FeatureTable table_;
    DiagLog diag_;
    std::vector<std::string> stage_log_;
};

// Full run over cfg.modes; writes features.csv, intervals.csv,
// correlations.csv, adaptation_diag.csv, report.json and exclusions.log
// into cfg.out_dir. Returns 0 on success; callers map exceptions to
// nonzero exits. When out_results is given the evaluation rows are copied
// there.
int run_pipeline(const PipelineConfig& cfg, std::vector<EvaluationRow>* out_results = nullptr);

// run_pipeline plus mode_comparison.csv; requires at least 2 modes.
int compare_modes(const PipelineConfig& cfg, std::vector<EvaluationRow>* out_results = nullptr);

void write_features_csv(const FeatureTable& table, const std::string& path);
void write_intervals_csv(const FeatureTable& table, const std::string& path);
void write_windows_csv(const std::map<std::string, fusion::FusionResult>& fused,
                       const std::string& path);
void write_track_csv(const std::map<std::string, fusion::FusionResult>& fused,
                     const std::string& path);
void write_ap_csv(const std::map<std::string, fusion::FusionResult>& fused,
                  const std::string& path);
void write_correlations_csv(const std::vector<learn::CorrelationRow>& rows,
                            const std::string& path);
void write_exclusions_log(const DiagLog& diag, const std::string& path);
void write_report_json(const Pipeline& pipe, const std::vector<EvaluationRow>& results,
                       const std::string& path);
void write_mode_comparison_csv(const std::vector<EvaluationRow>& results,
                               const std::string& path);

}  // namespace mobipred::pipeline
