#pragma once

#include <cstdint>
#include <vector>

namespace mobipred::svm {

struct SvmParams {
    double C = 1.0;
    double gamma = 1.0;
    double tol = 1e-3;           // KKT gap stopping threshold
    std::int64_t max_iter = 200000;
    bool record_objective = false;
};

// RBF-kernel SVM in the dual, solved by sequential minimal optimization
// with maximal-violating-pair working sets and a full kernel cache.
struct SvmModel {
    SvmParams params;
    std::vector<std::vector<double>> support_vectors;
    std::vector<double> sv_alpha_y;  // alpha_i * y_i per support vector
    std::vector<int> sv_indices;     // row index of each support vector
    double bias = 0.0;

    std::vector<double> alpha;  // full dual solution, training order
    bool converged = true;
    std::int64_t iterations = 0;
    double kkt_residual = 0.0;  // max complementarity violation at exit
    double dual_objective = 0.0;
    std::vector<double> objective_trace;  // per-iteration dual objective

    double decision(const std::vector<double>& x) const;
    int predict(const std::vector<double>& x) const { return decision(x) >= 0.0 ? +1 : -1; }
};

// Trains on rows X with labels y in {+1,-1}. Throws when classes are not
// both present, labels are malformed, or features are non-finite.
SvmModel svm_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const SvmParams& params);

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma);

}  // namespace mobipred::svm
