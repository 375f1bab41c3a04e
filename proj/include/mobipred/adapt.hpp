#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mobipred/ingest.hpp"

namespace mobipred::adapt {

struct FeatureRow {
    std::vector<double> values;
    int label = 0;  // +1 improved, -1 not improved
    std::string user_id;
    ingest::Platform platform = ingest::Platform::android;
};

struct FeatureMatrix {
    std::vector<FeatureRow> rows;

    std::size_t dim() const { return rows.empty() ? 0 : rows.front().values.size(); }
    std::size_t size() const { return rows.size(); }
};

Eigen::MatrixXd to_eigen(const FeatureMatrix& X);
Eigen::VectorXd column_means(const FeatureMatrix& X);

// Sample covariance, denominator N-1. Throws on N < 2 or non-finite input.
Eigen::MatrixXd covariance(const FeatureMatrix& X);

enum class Mode { none, source_to_target, dual };

// Correlation alignment: a linear recoloring map per direction. For
// source_to_target, rows transform as (x - mu_s) A + mu_t with
// A = (C_s + lambda I)^(-1/2) (C_t + lambda I)^(1/2). Dual mode maps both
// platforms onto the pooled covariance of their concatenation.
struct AdaptationModel {
    Mode mode = Mode::none;
    double lambda = 1.0;
    ingest::Platform source_platform = ingest::Platform::android;

    Eigen::MatrixXd A;
    Eigen::VectorXd mu_s, mu_t;
    Eigen::MatrixXd C_s, C_t;  // pre-ridge covariances

    Eigen::MatrixXd A_a, A_i;
    Eigen::VectorXd mu_a, mu_i, mu_pool;
    Eigen::MatrixXd C_a, C_i, C_pool;
};

// Fits the source->target map. Throws on dimension mismatch, fewer than 2
// rows on a side, non-finite input, or a ridged covariance that is not
// positive semi-definite beyond -1e-10.
AdaptationModel coral_fit(const FeatureMatrix& X_s, const FeatureMatrix& X_t,
                          double lambda = 1.0);

// Applies the single-direction map to every row of X, preserving labels,
// user ids and platform tags.
FeatureMatrix coral_transform(const AdaptationModel& model, const FeatureMatrix& X);

// Fits both per-platform maps onto the pooled covariance.
AdaptationModel dual_coral_fit(const FeatureMatrix& X_a, const FeatureMatrix& X_i,
                               double lambda = 1.0);

// Mode-aware application over a mixed-platform matrix: none copies through;
// source_to_target transforms only rows of the model's source platform; dual
// transforms each platform with its own map.
FeatureMatrix apply_adaptation(const AdaptationModel& model, const FeatureMatrix& X);

// Duplication-based balancing. Stage 1 appends each minority-class row
// (minority_factor - 1) extra times; minority_factor 0 picks the factor that
// best levels the classes. Stage 2 appends rows cyclically from the
// majority-first base ordering until round(global_factor * current) rows
// (or target_size, when positive) are reached, then shuffles under seed.
// When nothing was added the input comes back unchanged.
FeatureMatrix balance_upsample(const FeatureMatrix& source, std::size_t target_size,
                               int minority_factor, double global_factor, std::uint64_t seed);

struct AdaptationDiagnostics {
    double pre_frobenius = 0.0;   // ||C_a - C_i||_F on raw sides
    double post_frobenius = 0.0;  // same distance after applying the model
};

AdaptationDiagnostics adaptation_diagnostics(const FeatureMatrix& X_a, const FeatureMatrix& X_i,
                                             const AdaptationModel& model);

}  // namespace mobipred::adapt
