#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mobipred/adapt.hpp"
#include "mobipred/diag.hpp"
#include "mobipred/svm.hpp"

namespace mobipred::learn {

// Canonical feature-matrix layout fed to the evaluation harness:
// columns 0-7 interval location features, 8-15 location baseline,
// 16 interval QIDS score, 17 baseline QIDS score.
inline constexpr std::size_t kCanonicalDim = 18;
inline constexpr std::size_t kLocationColumns = 16;  // columns below this are location-derived

enum class Scenario {
    qids_plus_baseline,
    location,
    location_plus_location_baseline,
    location_plus_qids_baseline,
    location_plus_both_baselines,
    all,
};

inline constexpr std::array<Scenario, 6> kAllScenarios = {
    Scenario::qids_plus_baseline,
    Scenario::location,
    Scenario::location_plus_location_baseline,
    Scenario::location_plus_qids_baseline,
    Scenario::location_plus_both_baselines,
    Scenario::all,
};

std::string scenario_name(Scenario s);
std::optional<Scenario> parse_scenario(const std::string& name);
std::vector<std::size_t> scenario_columns(Scenario s);

enum class AdaptMode { none, android_transformed, ios_transformed, dual_transformed };

std::string adapt_mode_name(AdaptMode m);
std::optional<AdaptMode> parse_adapt_mode(const std::string& name);

struct Confusion {
    std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::int64_t total() const { return tp + fp + tn + fn; }
};

struct Metrics {
    Confusion counts;
    double precision = 0.0, recall = 0.0, f1 = 0.0;
    std::map<std::string, Confusion> per_user;
};

// Confusion counts with +1 (improved) as the positive class; zero
// denominators yield zero. Throws on empty or mismatched input.
Metrics f1_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                   const std::vector<std::string>* user_ids = nullptr);

// Sample correlation with a two-sided t-test p-value on n-2 degrees of
// freedom. Throws on n < 3 or a constant vector.
struct PearsonResult {
    double r = 0.0;
    double p = 1.0;
};
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

struct CorrelationRow {
    std::string feature;
    std::string stratum;  // all | improved | not_improved
    bool available = false;
    double r = 0.0;
    double p = 1.0;
};

// 8 features x 3 strata; a stratum under 3 rows or a constant column is
// marked unavailable.
std::vector<CorrelationRow> correlation_table(
    const std::vector<std::array<double, 8>>& features, const std::vector<double>& qids,
    const std::vector<int>& labels);

// Per grid point, recursively eliminates the feature whose removal changes
// the trained model's kernel margin term the least (alpha held fixed);
// elimination position becomes the feature's rank. Returns features by
// ascending mean rank across the grid, ties by ascending index.
std::vector<std::size_t> svm_rfe_rank(const std::vector<std::vector<double>>& X,
                                      const std::vector<int>& y,
                                      const std::vector<std::pair<double, double>>& grid,
                                      double tol = 1e-3);

struct LearnConfig {
    std::vector<int> c_exponents;      // C = 2^e
    std::vector<int> gamma_exponents;  // gamma = 2^e
    // Candidate top-m feature counts; empty means 2..D per protocol, the
    // value 0 stands for "all columns".
    std::vector<std::size_t> feature_counts;
    double svm_tol = 1e-3;
    std::int64_t svm_max_iter = 200000;
    double coral_lambda = 1.0;
    std::size_t balance_target = 0;
    int balance_minority_factor = 4;  // 0 picks the class-leveling factor
    double balance_global_factor = 1.4;
    bool nested_cv = false;  // per-fold inner selection instead of pooled
    bool macro_f1 = false;   // average per-fold F1 instead of pooling
};

struct LouoResult {
    Metrics overall;
    Metrics android_only;
    Metrics ios_only;
    int chosen_c_exp = 0;
    int chosen_gamma_exp = 0;
    std::size_t chosen_m = 0;
    std::vector<std::size_t> ranked_features;    // scenario-local column order
    std::vector<std::size_t> selected_features;  // top chosen_m of the ranking
    int n_folds = 0;
    int skipped_folds = 0;
    int leakage_violations = 0;  // test-user rows found in their own training partition
};

// Leave-one-user-out evaluation: per fold the training side is balanced,
// standardized and adaptation-fitted without the held-out user; predictions
// are pooled across folds and hyperparameters (C, gamma, m) maximize the
// pooled F1.
LouoResult louo_cross_validate(const adapt::FeatureMatrix& rows, Scenario scenario,
                               AdaptMode mode, const LearnConfig& cfg, std::uint64_t seed,
                               DiagLog* diag = nullptr);

}  // namespace mobipred::learn
