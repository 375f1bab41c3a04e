#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace oracles {

using mobipred::haversine_km;
using mobipred::LatLon;

std::vector<int> brute_dbscan(const std::vector<LatLon>& points, double eps_m, int min_pts) {
    const std::size_t n = points.size();
    std::vector<std::vector<std::size_t>> neighbors(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (haversine_km(points[i], points[j]) * 1000.0 <= eps_m) neighbors[i].push_back(j);

    std::vector<bool> core(n);
    for (std::size_t i = 0; i < n; ++i)
        core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_pts);

    std::vector<int> labels(n, -1);
    int next = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!core[seed] || labels[seed] != -1) continue;
        int cluster = next++;
        std::queue<std::size_t> frontier;
        labels[seed] = cluster;
        frontier.push(seed);
        while (!frontier.empty()) {
            std::size_t u = frontier.front();
            frontier.pop();
            if (!core[u]) continue;
            for (std::size_t v : neighbors[u]) {
                if (labels[v] != -1) continue;
                labels[v] = cluster;
                if (core[v]) frontier.push(v);
            }
        }
    }
    return labels;
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
    std::map<int, int> remap;
    std::vector<int> out(labels.size(), -1);
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0) continue;
        auto [it, inserted] = remap.emplace(labels[i], next);
        if (inserted) ++next;
        out[i] = it->second;
    }
    return out;
}

std::vector<std::vector<double>> covariance_matrix(const std::vector<std::vector<double>>& rows) {
    if (rows.size() < 2) throw std::runtime_error("covariance oracle: need at least 2 rows");
    const std::size_t n = rows.size(), d = rows.front().size();
    std::vector<double> mean(d, 0.0);
    for (const auto& row : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    for (auto& m : mean) m /= static_cast<double>(n);
    std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
    for (const auto& row : rows)
        for (std::size_t a = 0; a < d; ++a)
            for (std::size_t b = 0; b < d; ++b)
                cov[a][b] += (row[a] - mean[a]) * (row[b] - mean[b]);
    for (auto& r : cov)
        for (auto& v : r) v /= static_cast<double>(n - 1);
    return cov;
}

namespace {

// Regularized incomplete beta I_x(a, b) by the Lentz continued fraction.
double betacf(double a, double b, double x) {
    const double tiny = 1e-300;
    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 500; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < tiny) d = tiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h;
}

double reg_inc_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                      a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

PearsonOracle pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::runtime_error("pearson oracle: need at least 3 pairs");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    double mx = sx / n, my = sy / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::runtime_error("pearson oracle: degenerate input");
    PearsonOracle out;
    out.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    double df = n - 2.0;
    double denom = 1.0 - out.r * out.r;
    if (denom <= 0.0) {
        out.p = 0.0;
        return out;
    }
    double t2 = out.r * out.r * df / denom;
    // Two-sided: P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2).
    out.p = reg_inc_beta(df / 2.0, 0.5, df / (df + t2));
    return out;
}

namespace {

double rbf(const std::vector<double>& a, const std::vector<double>& b, double gamma) {
    double d2 = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        double d = a[k] - b[k];
        d2 += d * d;
    }
    return std::exp(-gamma * d2);
}

// Exact Euclidean projection onto {0 <= alpha <= C, y^T alpha = 0}: clip
// after shifting along y, with the shift found by bisection on the monotone
// constraint residual.
std::vector<double> project(const std::vector<double>& v, const std::vector<int>& y, double C) {
    auto residual = [&](double tau) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i)
            s += y[i] * std::clamp(v[i] - tau * y[i], 0.0, C);
        return s;
    };
    double lo = -1.0, hi = 1.0;
    while (residual(lo) < 0.0) lo *= 2.0;
    while (residual(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (residual(mid) > 0.0 ? lo : hi) = mid;
    }
    double tau = 0.5 * (lo + hi);
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::clamp(v[i] - tau * y[i], 0.0, C);
    return out;
}

}  // namespace

QpSolution qp_svm_reference(const std::vector<std::vector<double>>& X, const std::vector<int>& y,
                            double C, double gamma, int max_iter, double tol) {
    const std::size_t n = X.size();
    std::vector<std::vector<double>> Q(n, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) Q[i][j] = y[i] * y[j] * rbf(X[i], X[j], gamma);

    // Lipschitz bound via the trace; conservative but safe.
    double L = 0.0;
    for (std::size_t i = 0; i < n; ++i) L += Q[i][i];
    L = std::max(L, 1e-9);

    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n), next;
    for (int it = 0; it < max_iter; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double g = -1.0;
            for (std::size_t j = 0; j < n; ++j) g += Q[i][j] * alpha[j];
            grad[i] = g;
        }
        std::vector<double> step(n);
        for (std::size_t i = 0; i < n; ++i) step[i] = alpha[i] - grad[i] / L;
        next = project(step, y, C);
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(next[i] - alpha[i]));
        alpha.swap(next);
        if (delta < tol) break;
    }

    QpSolution sol;
    sol.alpha = alpha;
    // Bias from free vectors; fall back to the feasibility midpoint.
    double margin = 1e-8 * C;
    double sum = 0.0;
    int free_count = 0;
    std::vector<double> f(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) f[i] += alpha[j] * y[j] * rbf(X[j], X[i], gamma);
    double up = std::numeric_limits<double>::infinity();
    double lo = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        double b_i = y[i] - f[i];
        if (alpha[i] > margin && alpha[i] < C - margin) {
            sum += b_i;
            free_count += 1;
        }
        bool at_lower = alpha[i] <= margin;
        bool at_upper = alpha[i] >= C - margin;
        if ((y[i] > 0 && at_lower) || (y[i] < 0 && at_upper)) up = std::min(up, b_i);
        if ((y[i] > 0 && at_upper) || (y[i] < 0 && at_lower)) lo = std::max(lo, b_i);
    }
    sol.bias = free_count > 0 ? sum / free_count : 0.5 * (up + lo);
    return sol;
}

double qp_decision(const QpSolution& sol, const std::vector<std::vector<double>>& X,
                   const std::vector<int>& y, double gamma, const std::vector<double>& point) {
    double f = sol.bias;
    for (std::size_t i = 0; i < X.size(); ++i)
        f += sol.alpha[i] * y[i] * rbf(X[i], point, gamma);
    return f;
}

double entropy_nats(const std::vector<double>& dwell) {
    double total = 0.0;
    for (double d : dwell) total += d;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double d : dwell) {
        if (d <= 0.0) continue;
        double p = d / total;
        h -= p * std::log(p);
    }
    return h;
}

}  // namespace oracles
