#include "mobipred/svm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mobipred::svm {

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

double SvmModel::decision(const std::vector<double>& x) const {
    double f = bias;
    for (std::size_t s = 0; s < support_vectors.size(); ++s)
        f += sv_alpha_y[s] * rbf_kernel(support_vectors[s], x, params.gamma);
    return f;
}

SvmModel svm_train(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                   const SvmParams& params) {
    const int n = static_cast<int>(X.size());
    if (n == 0 || y.size() != X.size()) throw std::runtime_error("svm_train: bad input shape");
    bool has_pos = false, has_neg = false;
    for (int label : y) {
        if (label == +1)
            has_pos = true;
        else if (label == -1)
            has_neg = true;
        else
            throw std::runtime_error("svm_train: labels must be +1/-1");
    }
    if (!has_pos || !has_neg) throw std::runtime_error("svm_train: single-class input");
    for (const auto& row : X)
        for (double v : row)
            if (!std::isfinite(v)) throw std::runtime_error("svm_train: non-finite feature");

    const double C = params.C;
    std::vector<double> K(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        K[static_cast<std::size_t>(i) * n + i] = 1.0;
        for (int j = i + 1; j < n; ++j) {
            double v = rbf_kernel(X[i], X[j], params.gamma);
            K[static_cast<std::size_t>(i) * n + j] = v;
            K[static_cast<std::size_t>(j) * n + i] = v;
        }
    }

    // Minimize 1/2 a'Qa - e'a with Q_ij = y_i y_j K_ij, 0 <= a <= C, y'a = 0.
    std::vector<double> alpha(n, 0.0);
    std::vector<double> G(n, -1.0);  // gradient Qa - e

    SvmModel model;
    model.params = params;

    auto dual_objective = [&]() {
        // 1/2 a'Qa = 1/2 a'(G + e), so e'a - 1/2 a'Qa = (e'a - a'G) / 2.
        double ea = 0.0, ag = 0.0;
        for (int t = 0; t < n; ++t) {
            ea += alpha[t];
            ag += alpha[t] * G[t];
        }
        return 0.5 * (ea - ag);
    };

    std::int64_t iter = 0;
    for (; iter < params.max_iter; ++iter) {
        // Maximal violating pair over -y_t G_t.
        int i = -1, j = -1;
        double m_up = -1e300, m_low = 1e300;
        for (int t = 0; t < n; ++t) {
            double v = -y[t] * G[t];
            bool in_up = (y[t] == +1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
            bool in_low = (y[t] == -1 && alpha[t] < C) || (y[t] == +1 && alpha[t] > 0.0);
            if (in_up && v > m_up) {
                m_up = v;
                i = t;
            }
            if (in_low && v < m_low) {
                m_low = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || m_up - m_low < params.tol) break;

        // Step direction a_i += y_i s, a_j -= y_j s keeps y'a constant.
        const double* Ki = &K[static_cast<std::size_t>(i) * n];
        const double* Kj = &K[static_cast<std::size_t>(j) * n];
        double eta = std::max(Ki[i] + Kj[j] - 2.0 * Ki[j], 1e-12);
        double s = -(y[i] * G[i] - y[j] * G[j]) / eta;

        auto bounds = [C](double a, int label) {
            // Feasible s range for a + label * s in [0, C].
            return label == +1 ? std::pair<double, double>{-a, C - a}
                               : std::pair<double, double>{a - C, a};
        };
        auto [lo_i, hi_i] = bounds(alpha[i], y[i]);
        auto [lo_j, hi_j] = bounds(alpha[j], -y[j]);
        double lo = std::max(lo_i, lo_j), hi = std::min(hi_i, hi_j);
        s = std::clamp(s, lo, hi);
        if (s == 0.0) break;  // numerically stuck at a box corner

        alpha[i] += y[i] * s;
        alpha[j] -= y[j] * s;
        alpha[i] = std::clamp(alpha[i], 0.0, C);
        alpha[j] = std::clamp(alpha[j], 0.0, C);
        for (int t = 0; t < n; ++t) G[t] += s * y[t] * (Ki[t] - Kj[t]);

        if (params.record_objective) model.objective_trace.push_back(dual_objective());
    }
    model.iterations = iter;
    model.converged = iter < params.max_iter;
    model.dual_objective = dual_objective();

    // Bias from free support vectors; fall back to the violating-pair
    // midpoint when every alpha sits on the box boundary.
    double b_sum = 0.0;
    int b_count = 0;
    for (int t = 0; t < n; ++t) {
        if (alpha[t] > 0.0 && alpha[t] < C) {
            b_sum += -y[t] * G[t];
            b_count += 1;
        }
    }
    if (b_count > 0) {
        model.bias = b_sum / b_count;
    } else {
        double m_up = -1e300, m_low = 1e300;
        for (int t = 0; t < n; ++t) {
            double v = -y[t] * G[t];
            bool in_up = (y[t] == +1 && alpha[t] < C) || (y[t] == -1 && alpha[t] > 0.0);
            bool in_low = (y[t] == -1 && alpha[t] < C) || (y[t] == +1 && alpha[t] > 0.0);
            if (in_up) m_up = std::max(m_up, v);
            if (in_low) m_low = std::min(m_low, v);
        }
        model.bias = 0.5 * (m_up + m_low);
    }

    // y_t f(x_t) = G_t + 1 + y_t b, so KKT slack comes straight from G.
    double worst = 0.0;
    for (int t = 0; t < n; ++t) {
        double margin = G[t] + 1.0 + y[t] * model.bias;
        if (alpha[t] <= 0.0)
            worst = std::max(worst, 1.0 - margin);
        else if (alpha[t] >= C)
            worst = std::max(worst, margin - 1.0);
        else
            worst = std::max(worst, std::abs(margin - 1.0));
    }
    model.kkt_residual = worst;

    model.alpha = alpha;
    for (int t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            model.support_vectors.push_back(X[t]);
            model.sv_alpha_y.push_back(alpha[t] * y[t]);
            model.sv_indices.push_back(t);
        }
    }
    return model;
}

}  // namespace mobipred::svm
