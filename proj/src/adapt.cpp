#include "mobipred/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mobipred/rng.hpp"

namespace mobipred::adapt {

namespace {

void require_finite(const FeatureMatrix& X, const char* who) {
    for (const auto& row : X.rows)
        for (double v : row.values)
            if (!std::isfinite(v)) throw std::runtime_error(std::string(who) + ": non-finite input");
}

void require_same_dim(const FeatureMatrix& a, const FeatureMatrix& b, const char* who) {
    if (a.dim() != b.dim())
        throw std::runtime_error(std::string(who) + ": dimension mismatch");
}

// Symmetric PSD matrix power via eigendecomposition. Eigenvalues below the
// PSD tolerance are an error; small negatives are clamped to zero, and zero
// eigenvalues contribute nothing to negative powers (pseudo-inverse).
Eigen::MatrixXd sym_power(const Eigen::MatrixXd& M, double exponent, const char* who) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error(std::string(who) + ": eigendecomposition failed");
    Eigen::VectorXd ev = es.eigenvalues();
    double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
    Eigen::VectorXd powered(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        double v = ev[i];
        if (v < -1e-10 * scale)
            throw std::runtime_error(std::string(who) + ": covariance not PSD");
        v = std::max(v, 0.0);
        powered[i] = v <= 1e-14 * scale ? 0.0 : std::pow(v, exponent);
    }
    return es.eigenvectors() * powered.asDiagonal() * es.eigenvectors().transpose();
}

Eigen::MatrixXd ridged(const Eigen::MatrixXd& C, double lambda) {
    return C + lambda * Eigen::MatrixXd::Identity(C.rows(), C.cols());
}

void transform_rows(FeatureMatrix& X, const Eigen::VectorXd& mu_from, const Eigen::MatrixXd& A,
                    const Eigen::VectorXd& mu_to, ingest::Platform only_platform,
                    bool platform_filter) {
    const Eigen::Index d = A.rows();
    for (auto& row : X.rows) {
        if (platform_filter && row.platform != only_platform) continue;
        Eigen::VectorXd x(d);
        for (Eigen::Index j = 0; j < d; ++j) x[j] = row.values[j];
        Eigen::VectorXd y = A.transpose() * (x - mu_from) + mu_to;
        for (Eigen::Index j = 0; j < d; ++j) row.values[j] = y[j];
    }
}

}  // namespace

Eigen::MatrixXd to_eigen(const FeatureMatrix& X) {
    Eigen::MatrixXd M(X.size(), X.dim());
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t j = 0; j < X.dim(); ++j) M(i, j) = X.rows[i].values[j];
    return M;
}

Eigen::VectorXd column_means(const FeatureMatrix& X) {
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(X.dim());
    for (const auto& row : X.rows)
        for (std::size_t j = 0; j < X.dim(); ++j) mu[j] += row.values[j];
    if (!X.rows.empty()) mu /= static_cast<double>(X.size());
    return mu;
}

Eigen::MatrixXd covariance(const FeatureMatrix& X) {
    if (X.size() < 2) throw std::runtime_error("covariance: insufficient rows");
    require_finite(X, "covariance");
    Eigen::MatrixXd M = to_eigen(X);
    Eigen::RowVectorXd mu = M.colwise().mean();
    M.rowwise() -= mu;
    return (M.transpose() * M) / static_cast<double>(X.size() - 1);
}

AdaptationModel coral_fit(const FeatureMatrix& X_s, const FeatureMatrix& X_t, double lambda) {
    require_same_dim(X_s, X_t, "coral_fit");
    AdaptationModel m;
    m.mode = Mode::source_to_target;
    m.lambda = lambda;
    if (!X_s.rows.empty()) m.source_platform = X_s.rows.front().platform;
    m.C_s = covariance(X_s);
    m.C_t = covariance(X_t);
    m.mu_s = column_means(X_s);
    m.mu_t = column_means(X_t);
    m.A = sym_power(ridged(m.C_s, lambda), -0.5, "coral_fit") *
          sym_power(ridged(m.C_t, lambda), 0.5, "coral_fit");
    return m;
}

FeatureMatrix coral_transform(const AdaptationModel& model, const FeatureMatrix& X) {
    if (X.dim() != static_cast<std::size_t>(model.A.rows()))
        throw std::runtime_error("coral_transform: dimension mismatch");
    require_finite(X, "coral_transform");
    FeatureMatrix out = X;
    transform_rows(out, model.mu_s, model.A, model.mu_t, model.source_platform, false);
    return out;
}

AdaptationModel dual_coral_fit(const FeatureMatrix& X_a, const FeatureMatrix& X_i,
                               double lambda) {
    require_same_dim(X_a, X_i, "dual_coral_fit");
    AdaptationModel m;
    m.mode = Mode::dual;
    m.lambda = lambda;
    m.C_a = covariance(X_a);
    m.C_i = covariance(X_i);
    m.mu_a = column_means(X_a);
    m.mu_i = column_means(X_i);

    FeatureMatrix pooled;
    pooled.rows.reserve(X_a.size() + X_i.size());
    pooled.rows.insert(pooled.rows.end(), X_a.rows.begin(), X_a.rows.end());
    pooled.rows.insert(pooled.rows.end(), X_i.rows.begin(), X_i.rows.end());
    m.C_pool = covariance(pooled);
    m.mu_pool = column_means(pooled);

    Eigen::MatrixXd pool_half = sym_power(ridged(m.C_pool, lambda), 0.5, "dual_coral_fit");
    m.A_a = sym_power(ridged(m.C_a, lambda), -0.5, "dual_coral_fit") * pool_half;
    m.A_i = sym_power(ridged(m.C_i, lambda), -0.5, "dual_coral_fit") * pool_half;
    return m;
}

FeatureMatrix apply_adaptation(const AdaptationModel& model, const FeatureMatrix& X) {
    if (model.mode == Mode::none) return X;
    require_finite(X, "apply_adaptation");
    FeatureMatrix out = X;
    if (model.mode == Mode::source_to_target) {
        if (X.dim() != static_cast<std::size_t>(model.A.rows()))
            throw std::runtime_error("apply_adaptation: dimension mismatch");
        transform_rows(out, model.mu_s, model.A, model.mu_t, model.source_platform, true);
        return out;
    }
    if (X.dim() != static_cast<std::size_t>(model.A_a.rows()))
        throw std::runtime_error("apply_adaptation: dimension mismatch");
    transform_rows(out, model.mu_a, model.A_a, model.mu_pool, ingest::Platform::android, true);
    transform_rows(out, model.mu_i, model.A_i, model.mu_pool, ingest::Platform::ios, true);
    return out;
}

FeatureMatrix balance_upsample(const FeatureMatrix& source, std::size_t target_size,
                               int minority_factor, double global_factor, std::uint64_t seed) {
    std::size_t pos = 0, neg = 0;
    for (const auto& row : source.rows) (row.label > 0 ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw std::runtime_error("balance_upsample: empty class");

    int minority_label = pos < neg ? +1 : -1;
    bool classes_equal = pos == neg;

    // Majority rows first, each group in input order; stage-2 extras cycle
    // from the front so they hit majority rows before minority rows.
    std::vector<const FeatureRow*> base;
    base.reserve(source.size());
    for (const auto& row : source.rows)
        if (classes_equal || row.label != minority_label) base.push_back(&row);
    std::size_t majority_count = base.size();
    for (const auto& row : source.rows)
        if (!classes_equal && row.label == minority_label) base.push_back(&row);

    if (minority_factor == 0 && !classes_equal) {
        std::size_t minority = std::min(pos, neg);
        minority_factor = static_cast<int>(
            std::max<std::size_t>(1, (std::max(pos, neg) + minority / 2) / minority));
    }
    if (minority_factor < 1) minority_factor = 1;

    std::vector<const FeatureRow*> work = base;
    if (!classes_equal) {
        for (std::size_t i = majority_count; i < base.size(); ++i)
            for (int k = 1; k < minority_factor; ++k) work.push_back(base[i]);
    }

    std::size_t target = target_size > 0
                             ? target_size
                             : static_cast<std::size_t>(
                                   std::llround(global_factor * static_cast<double>(work.size())));
    for (std::size_t k = 0; work.size() < target; ++k) work.push_back(base[k % base.size()]);

    if (work.size() == source.size()) return source;

    FeatureMatrix out;
    out.rows.reserve(work.size());
    for (const FeatureRow* r : work) out.rows.push_back(*r);
    Rng rng(seed);
    rng.shuffle(out.rows);
    return out;
}

AdaptationDiagnostics adaptation_diagnostics(const FeatureMatrix& X_a, const FeatureMatrix& X_i,
                                             const AdaptationModel& model) {
    AdaptationDiagnostics d;
    d.pre_frobenius = (covariance(X_a) - covariance(X_i)).norm();
    FeatureMatrix ta = apply_adaptation(model, X_a);
    FeatureMatrix ti = apply_adaptation(model, X_i);
    d.post_frobenius = (covariance(ta) - covariance(ti)).norm();
    return d;
}

}  // namespace mobipred::adapt
