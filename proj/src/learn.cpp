#include "mobipred/learn.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "mobipred/rng.hpp"

namespace mobipred::learn {

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::qids_plus_baseline: return "qids_plus_baseline";
        case Scenario::location: return "location";
        case Scenario::location_plus_location_baseline: return "location_plus_location_baseline";
        case Scenario::location_plus_qids_baseline: return "location_plus_qids_baseline";
        case Scenario::location_plus_both_baselines: return "location_plus_both_baselines";
        case Scenario::all: return "all_features";
    }
    return "all_features";
}

std::optional<Scenario> parse_scenario(const std::string& name) {
    for (Scenario s : kAllScenarios)
        if (scenario_name(s) == name) return s;
    return std::nullopt;
}

std::vector<std::size_t> scenario_columns(Scenario s) {
    auto range = [](std::size_t lo, std::size_t hi) {
        std::vector<std::size_t> v(hi - lo);
        std::iota(v.begin(), v.end(), lo);
        return v;
    };
    switch (s) {
        case Scenario::qids_plus_baseline: return {16, 17};
        case Scenario::location: return range(0, 8);
        case Scenario::location_plus_location_baseline: return range(0, 16);
        case Scenario::location_plus_qids_baseline: {
            auto v = range(0, 8);
            v.push_back(17);
            return v;
        }
        case Scenario::location_plus_both_baselines: {
            auto v = range(0, 16);
            v.push_back(17);
            return v;
        }
        case Scenario::all: return range(0, 18);
    }
    return range(0, 18);
}

std::string adapt_mode_name(AdaptMode m) {
    switch (m) {
        case AdaptMode::none: return "none";
        case AdaptMode::android_transformed: return "android_transformed";
        case AdaptMode::ios_transformed: return "ios_transformed";
        case AdaptMode::dual_transformed: return "dual_transformed";
    }
    return "none";
}

std::optional<AdaptMode> parse_adapt_mode(const std::string& name) {
    for (AdaptMode m : {AdaptMode::none, AdaptMode::android_transformed,
                        AdaptMode::ios_transformed, AdaptMode::dual_transformed})
        if (adapt_mode_name(m) == name) return m;
    return std::nullopt;
}

Metrics f1_metrics(const std::vector<int>& predictions, const std::vector<int>& labels,
                   const std::vector<std::string>* user_ids) {
    if (predictions.empty() || predictions.size() != labels.size())
        throw std::runtime_error("f1_metrics: empty or mismatched input");
    Metrics m;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        Confusion* user = nullptr;
        if (user_ids) user = &m.per_user[(*user_ids)[i]];
        bool pred_pos = predictions[i] > 0;
        bool truth_pos = labels[i] > 0;
        if (pred_pos && truth_pos) {
            m.counts.tp += 1;
            if (user) user->tp += 1;
        } else if (pred_pos) {
            m.counts.fp += 1;
            if (user) user->fp += 1;
        } else if (truth_pos) {
            m.counts.fn += 1;
            if (user) user->fn += 1;
        } else {
            m.counts.tn += 1;
            if (user) user->tn += 1;
        }
    }
    double pd = static_cast<double>(m.counts.tp + m.counts.fp);
    double rd = static_cast<double>(m.counts.tp + m.counts.fn);
    m.precision = pd > 0 ? m.counts.tp / pd : 0.0;
    m.recall = rd > 0 ? m.counts.tp / rd : 0.0;
    m.f1 = (m.precision + m.recall) > 0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    return m;
}

PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 3)
        throw std::runtime_error("pearson: need at least 3 paired values");
    const double n = static_cast<double>(x.size());
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) throw std::runtime_error("pearson: undefined correlation");
    PearsonResult res;
    res.r = sxy / std::sqrt(sxx * syy);
    res.r = std::clamp(res.r, -1.0, 1.0);

    double df = n - 2.0;
    double denom = 1.0 - res.r * res.r;
    if (denom <= 0.0) {
        res.p = 0.0;
        return res;
    }
    double t = res.r * std::sqrt(df / denom);
    boost::math::students_t dist(df);
    res.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return res;
}

std::vector<CorrelationRow> correlation_table(
    const std::vector<std::array<double, 8>>& features, const std::vector<double>& qids,
    const std::vector<int>& labels) {
    if (features.size() != qids.size() || features.size() != labels.size())
        throw std::runtime_error("correlation_table: mismatched input sizes");
    static constexpr std::array<const char*, 8> names = {
        "location_variance", "time_moving_frac",   "total_distance_norm", "avg_moving_speed",
        "n_unique_locations", "entropy",           "normalized_entropy",  "time_home_frac"};

    std::vector<CorrelationRow> out;
    for (const std::string stratum : {"all", "improved", "not_improved"}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (stratum == "all" || (stratum == "improved" && labels[i] > 0) ||
                (stratum == "not_improved" && labels[i] <= 0))
                idx.push_back(i);
        }
        for (std::size_t f = 0; f < 8; ++f) {
            CorrelationRow row;
            row.feature = names[f];
            row.stratum = stratum;
            if (idx.size() >= 3) {
                std::vector<double> xs, ys;
                xs.reserve(idx.size());
                ys.reserve(idx.size());
                for (std::size_t i : idx) {
                    xs.push_back(features[i][f]);
                    ys.push_back(qids[i]);
                }
                try {
                    auto pr = pearson(xs, ys);
                    row.available = true;
                    row.r = pr.r;
                    row.p = pr.p;
                } catch (const std::exception&) {
                    row.available = false;
                }
            }
            out.push_back(row);
        }
    }
    return out;
}

namespace {

// Kernel margin term sum_{s,t} (alpha_s y_s)(alpha_t y_t) K(x_s, x_t) over
// support vectors, with per-feature squared differences removable so the
// elimination criterion reuses one trained model.
double margin_term(const svm::SvmModel& model, double gamma, int drop_feature) {
    const auto& sv = model.support_vectors;
    double J = 0.0;
    for (std::size_t s = 0; s < sv.size(); ++s) {
        for (std::size_t t = 0; t < sv.size(); ++t) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < sv[s].size(); ++k) {
                if (static_cast<int>(k) == drop_feature) continue;
                double d = sv[s][k] - sv[t][k];
                d2 += d * d;
            }
            J += model.sv_alpha_y[s] * model.sv_alpha_y[t] * std::exp(-gamma * d2);
        }
    }
    return J;
}

}  // namespace

std::vector<std::size_t> svm_rfe_rank(const std::vector<std::vector<double>>& X,
                                      const std::vector<int>& y,
                                      const std::vector<std::pair<double, double>>& grid,
                                      double tol) {
    if (grid.empty()) throw std::runtime_error("svm_rfe_rank: empty grid");
    if (X.empty() || X.front().size() < 2)
        throw std::runtime_error("svm_rfe_rank: need at least 2 features");
    const std::size_t D = X.front().size();

    std::vector<double> mean_rank(D, 0.0);
    for (const auto& [C, gamma] : grid) {
        std::vector<std::size_t> active(D);
        std::iota(active.begin(), active.end(), 0);
        std::vector<double> rank(D, 1.0);

        while (active.size() > 1) {
            std::vector<std::vector<double>> sub(X.size(), std::vector<double>(active.size()));
            for (std::size_t i = 0; i < X.size(); ++i)
                for (std::size_t c = 0; c < active.size(); ++c) sub[i][c] = X[i][active[c]];

            svm::SvmParams params;
            params.C = C;
            params.gamma = gamma;
            params.tol = tol;
            auto model = svm_train(sub, y, params);

            double J = margin_term(model, gamma, -1);
            std::size_t drop = 0;
            double best = 0.0;
            for (std::size_t c = 0; c < active.size(); ++c) {
                double crit = std::abs(J - margin_term(model, gamma, static_cast<int>(c)));
                if (c == 0 || crit < best) {
                    best = crit;
                    drop = c;
                }
            }
            rank[active[drop]] = static_cast<double>(active.size());
            active.erase(active.begin() + static_cast<std::ptrdiff_t>(drop));
        }
        for (std::size_t f = 0; f < D; ++f) mean_rank[f] += rank[f];
    }

    std::vector<std::size_t> order(D);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (mean_rank[a] != mean_rank[b]) return mean_rank[a] < mean_rank[b];
        return a < b;
    });
    return order;
}

namespace {

adapt::FeatureMatrix restrict_columns(const adapt::FeatureMatrix& X,
                                      const std::vector<std::size_t>& cols) {
    adapt::FeatureMatrix out;
    out.rows.reserve(X.size());
    for (const auto& row : X.rows) {
        adapt::FeatureRow r;
        r.label = row.label;
        r.user_id = row.user_id;
        r.platform = row.platform;
        r.values.reserve(cols.size());
        for (std::size_t c : cols) r.values.push_back(row.values[c]);
        out.rows.push_back(std::move(r));
    }
    return out;
}

void write_back_columns(adapt::FeatureMatrix& X, const std::vector<std::size_t>& positions,
                        const adapt::FeatureMatrix& sub) {
    for (std::size_t i = 0; i < X.rows.size(); ++i)
        for (std::size_t c = 0; c < positions.size(); ++c)
            X.rows[i].values[positions[c]] = sub.rows[i].values[c];
}

struct Standardizer {
    std::vector<double> mean, scale;

    void fit(const adapt::FeatureMatrix& X) {
        std::size_t d = X.dim();
        mean.assign(d, 0.0);
        scale.assign(d, 1.0);
        if (X.rows.empty()) return;
        for (const auto& row : X.rows)
            for (std::size_t j = 0; j < d; ++j) mean[j] += row.values[j];
        for (auto& m : mean) m /= static_cast<double>(X.size());
        std::vector<double> var(d, 0.0);
        for (const auto& row : X.rows)
            for (std::size_t j = 0; j < d; ++j) {
                double dv = row.values[j] - mean[j];
                var[j] += dv * dv;
            }
        for (std::size_t j = 0; j < d; ++j) {
            double sd = std::sqrt(var[j] / static_cast<double>(X.size()));
            scale[j] = sd > 1e-12 ? sd : 1.0;
        }
    }

    void apply(adapt::FeatureMatrix& X) const {
        for (auto& row : X.rows)
            for (std::size_t j = 0; j < row.values.size(); ++j)
                row.values[j] = (row.values[j] - mean[j]) / scale[j];
    }
};

struct Fold {
    std::vector<std::vector<double>> train_x;
    std::vector<int> train_y;
    std::vector<std::vector<double>> test_x;
    std::vector<int> test_y;
    std::vector<std::string> test_users;
    std::vector<ingest::Platform> test_platforms;
};

// Balances, standardizes and adapts one training split, applying the fitted
// parameters to the held-out rows. Returns false when the training side has
// a single class.
bool prepare_fold(const adapt::FeatureMatrix& W, const std::vector<std::size_t>& loc_positions,
                  const std::string& held_out, AdaptMode mode, const LearnConfig& cfg,
                  std::uint64_t balance_seed, Fold& fold, int* leakage_violations,
                  DiagLog* diag) {
    adapt::FeatureMatrix train, test;
    for (const auto& row : W.rows) (row.user_id == held_out ? test : train).rows.push_back(row);

    bool pos = false, neg = false;
    for (const auto& row : train.rows) (row.label > 0 ? pos : neg) = true;
    if (!pos || !neg) {
        if (diag) diag->note("fold_skipped", "user=" + held_out + " single-class training set");
        return false;
    }

    adapt::FeatureMatrix balanced =
        adapt::balance_upsample(train, cfg.balance_target, cfg.balance_minority_factor,
                                cfg.balance_global_factor, balance_seed);
    if (leakage_violations) {
        for (const auto& row : balanced.rows)
            if (row.user_id == held_out) *leakage_violations += 1;
    }

    // Standardization precedes adaptation so that per-column rescalings of the
    // input are absorbed before the ridged maps see the data; this keeps the
    // ridge commensurate across columns and predictions scale-invariant.
    Standardizer std_;
    std_.fit(balanced);
    std_.apply(balanced);
    std_.apply(test);

    if (mode != AdaptMode::none && !loc_positions.empty()) {
        adapt::FeatureMatrix sub_train = restrict_columns(balanced, loc_positions);
        adapt::FeatureMatrix sub_a, sub_i;
        for (const auto& row : sub_train.rows)
            (row.platform == ingest::Platform::android ? sub_a : sub_i).rows.push_back(row);
        if (sub_a.size() < 2 || sub_i.size() < 2) {
            if (diag)
                diag->note("adaptation_skipped",
                           "user=" + held_out + " a platform side has fewer than 2 rows");
        } else {
            adapt::AdaptationModel model;
            if (mode == AdaptMode::android_transformed)
                model = adapt::coral_fit(sub_a, sub_i, cfg.coral_lambda);
            else if (mode == AdaptMode::ios_transformed)
                model = adapt::coral_fit(sub_i, sub_a, cfg.coral_lambda);
            else
                model = adapt::dual_coral_fit(sub_a, sub_i, cfg.coral_lambda);
            write_back_columns(balanced, loc_positions,
                               adapt::apply_adaptation(model, sub_train));
            adapt::FeatureMatrix sub_test = restrict_columns(test, loc_positions);
            write_back_columns(test, loc_positions, adapt::apply_adaptation(model, sub_test));
        }
    }

    fold.train_x.reserve(balanced.size());
    fold.train_y.reserve(balanced.size());
    for (auto& row : balanced.rows) {
        fold.train_x.push_back(std::move(row.values));
        fold.train_y.push_back(row.label);
    }
    for (auto& row : test.rows) {
        fold.test_x.push_back(std::move(row.values));
        fold.test_y.push_back(row.label);
        fold.test_users.push_back(row.user_id);
        fold.test_platforms.push_back(row.platform);
    }
    return true;
}

std::vector<std::vector<double>> take_columns(const std::vector<std::vector<double>>& X,
                                              const std::vector<std::size_t>& cols) {
    std::vector<std::vector<double>> out(X.size(), std::vector<double>(cols.size()));
    for (std::size_t i = 0; i < X.size(); ++i)
        for (std::size_t c = 0; c < cols.size(); ++c) out[i][c] = X[i][cols[c]];
    return out;
}

struct PooledPredictions {
    std::vector<int> preds, labels;
    std::vector<std::string> users;
    std::vector<ingest::Platform> platforms;
    std::vector<std::size_t> fold_sizes;
};

double selection_score(const PooledPredictions& pp, bool macro) {
    if (pp.preds.empty()) return 0.0;
    if (!macro) return f1_metrics(pp.preds, pp.labels).f1;
    double sum = 0.0;
    std::size_t offset = 0, folds = 0;
    for (std::size_t sz : pp.fold_sizes) {
        if (sz == 0) continue;
        std::vector<int> p(pp.preds.begin() + offset, pp.preds.begin() + offset + sz);
        std::vector<int> l(pp.labels.begin() + offset, pp.labels.begin() + offset + sz);
        sum += f1_metrics(p, l).f1;
        offset += sz;
        folds += 1;
    }
    return folds > 0 ? sum / static_cast<double>(folds) : 0.0;
}

Metrics platform_metrics(const PooledPredictions& pp, ingest::Platform platform) {
    std::vector<int> preds, labels;
    std::vector<std::string> users;
    for (std::size_t i = 0; i < pp.preds.size(); ++i) {
        if (pp.platforms[i] != platform) continue;
        preds.push_back(pp.preds[i]);
        labels.push_back(pp.labels[i]);
        users.push_back(pp.users[i]);
    }
    if (preds.empty()) return Metrics{};
    return f1_metrics(preds, labels, &users);
}

}  // namespace

LouoResult louo_cross_validate(const adapt::FeatureMatrix& rows, Scenario scenario,
                               AdaptMode mode, const LearnConfig& cfg, std::uint64_t seed,
                               DiagLog* diag) {
    if (rows.dim() != kCanonicalDim)
        throw std::runtime_error("louo_cross_validate: expected the canonical 18-column layout");
    if (cfg.c_exponents.empty() || cfg.gamma_exponents.empty())
        throw std::runtime_error("louo_cross_validate: empty hyperparameter grid");

    std::set<std::string> user_set;
    for (const auto& row : rows.rows) user_set.insert(row.user_id);
    std::vector<std::string> users(user_set.begin(), user_set.end());
    if (users.size() < 2) throw std::runtime_error("louo_cross_validate: need at least 2 users");

    const std::vector<std::size_t> cols = scenario_columns(scenario);
    adapt::FeatureMatrix W = restrict_columns(rows, cols);
    std::vector<std::size_t> loc_positions;
    for (std::size_t p = 0; p < cols.size(); ++p)
        if (cols[p] < kLocationColumns) loc_positions.push_back(p);
    const std::size_t D = cols.size();

    LouoResult result;
    Rng rng(seed);

    // Candidate top-m counts: explicit list (0 means every column), or the
    // full 2..D sweep.
    std::vector<std::size_t> m_list;
    if (cfg.feature_counts.empty()) {
        for (std::size_t m = std::min<std::size_t>(2, D); m <= D; ++m) m_list.push_back(m);
    } else {
        for (std::size_t m : cfg.feature_counts)
            m_list.push_back(m == 0 ? D : std::min(m, D));
        std::sort(m_list.begin(), m_list.end());
        m_list.erase(std::unique(m_list.begin(), m_list.end()), m_list.end());
    }
    bool need_ranking = m_list.size() > 1 || m_list.front() < D;

    if (cfg.nested_cv) {
        // Per-fold inner selection: each fold picks its own hyperparameters
        // on its training users only, then predicts the held-out user.
        PooledPredictions pooled;
        LearnConfig inner_cfg = cfg;
        inner_cfg.nested_cv = false;
        for (std::size_t k = 0; k < users.size(); ++k) {
            adapt::FeatureMatrix inner_rows;
            for (const auto& row : rows.rows)
                if (row.user_id != users[k]) inner_rows.rows.push_back(row);
            std::set<std::string> inner_users;
            for (const auto& row : inner_rows.rows) inner_users.insert(row.user_id);
            if (inner_users.size() < 2) {
                result.skipped_folds += 1;
                continue;
            }
            LouoResult inner;
            try {
                inner = louo_cross_validate(inner_rows, scenario, mode, inner_cfg,
                                            rng.fork(k).next_u64(), nullptr);
            } catch (const std::exception&) {
                result.skipped_folds += 1;
                continue;
            }

            Fold fold;
            int violations = 0;
            if (!prepare_fold(W, loc_positions, users[k], mode, cfg,
                              Rng(seed).fork(k).next_u64(), fold, &violations, diag)) {
                result.skipped_folds += 1;
                continue;
            }
            result.leakage_violations += violations;
            result.n_folds += 1;
            if (fold.test_x.empty()) continue;

            std::vector<std::size_t> selected(
                inner.selected_features.begin(),
                inner.selected_features.begin() +
                    static_cast<std::ptrdiff_t>(std::min(inner.chosen_m,
                                                         inner.selected_features.size())));
            if (selected.empty()) {
                selected.resize(D);
                std::iota(selected.begin(), selected.end(), 0);
            }
            svm::SvmParams params;
            params.C = std::pow(2.0, inner.chosen_c_exp);
            params.gamma = std::pow(2.0, inner.chosen_gamma_exp);
            params.tol = cfg.svm_tol;
            params.max_iter = cfg.svm_max_iter;
            auto model = svm_train(take_columns(fold.train_x, selected), fold.train_y, params);
            auto test = take_columns(fold.test_x, selected);
            for (std::size_t i = 0; i < test.size(); ++i) {
                pooled.preds.push_back(model.predict(test[i]));
                pooled.labels.push_back(fold.test_y[i]);
                pooled.users.push_back(fold.test_users[i]);
                pooled.platforms.push_back(fold.test_platforms[i]);
            }
            pooled.fold_sizes.push_back(test.size());
        }
        if (!pooled.preds.empty()) {
            result.overall = f1_metrics(pooled.preds, pooled.labels, &pooled.users);
            if (cfg.macro_f1) result.overall.f1 = selection_score(pooled, true);
            result.android_only = platform_metrics(pooled, ingest::Platform::android);
            result.ios_only = platform_metrics(pooled, ingest::Platform::ios);
        }
        return result;
    }

    // Fold caches are hyperparameter-independent; build them once.
    std::vector<Fold> folds;
    folds.reserve(users.size());
    for (std::size_t k = 0; k < users.size(); ++k) {
        Fold fold;
        int violations = 0;
        if (!prepare_fold(W, loc_positions, users[k], mode, cfg, Rng(seed).fork(k).next_u64(),
                          fold, &violations, diag)) {
            result.skipped_folds += 1;
            continue;
        }
        result.leakage_violations += violations;
        result.n_folds += 1;
        folds.push_back(std::move(fold));
    }
    if (folds.empty()) {
        if (diag) diag->note("louo_degenerate", "every fold was skipped");
        return result;
    }

    // Feature ranking follows the averaged-RFE protocol, computed once on
    // the standardized, adapted (unbalanced) dataset.
    std::vector<std::size_t> ranked(D);
    std::iota(ranked.begin(), ranked.end(), 0);
    if (need_ranking) {
        adapt::FeatureMatrix all = W;
        Standardizer std_;
        std_.fit(all);
        std_.apply(all);
        if (mode != AdaptMode::none && !loc_positions.empty()) {
            adapt::FeatureMatrix sub = restrict_columns(all, loc_positions);
            adapt::FeatureMatrix sub_a, sub_i;
            for (const auto& row : sub.rows)
                (row.platform == ingest::Platform::android ? sub_a : sub_i).rows.push_back(row);
            if (sub_a.size() >= 2 && sub_i.size() >= 2) {
                adapt::AdaptationModel model;
                if (mode == AdaptMode::android_transformed)
                    model = adapt::coral_fit(sub_a, sub_i, cfg.coral_lambda);
                else if (mode == AdaptMode::ios_transformed)
                    model = adapt::coral_fit(sub_i, sub_a, cfg.coral_lambda);
                else
                    model = adapt::dual_coral_fit(sub_a, sub_i, cfg.coral_lambda);
                write_back_columns(all, loc_positions, adapt::apply_adaptation(model, sub));
            }
        }
        std::vector<std::vector<double>> X;
        std::vector<int> y;
        X.reserve(all.size());
        for (auto& row : all.rows) {
            X.push_back(std::move(row.values));
            y.push_back(row.label);
        }
        std::vector<std::pair<double, double>> grid;
        for (int ce : cfg.c_exponents)
            for (int ge : cfg.gamma_exponents)
                grid.emplace_back(std::pow(2.0, ce), std::pow(2.0, ge));
        ranked = svm_rfe_rank(X, y, grid, cfg.svm_tol);
    }
    result.ranked_features = ranked;

    double best_score = -1.0;
    PooledPredictions best_pooled;
    for (std::size_t m : m_list) {
        std::vector<std::size_t> selected(ranked.begin(),
                                          ranked.begin() + static_cast<std::ptrdiff_t>(m));
        std::vector<std::vector<std::vector<double>>> train_slices, test_slices;
        train_slices.reserve(folds.size());
        test_slices.reserve(folds.size());
        for (const auto& fold : folds) {
            train_slices.push_back(take_columns(fold.train_x, selected));
            test_slices.push_back(take_columns(fold.test_x, selected));
        }
        for (int ce : cfg.c_exponents) {
            for (int ge : cfg.gamma_exponents) {
                svm::SvmParams params;
                params.C = std::pow(2.0, ce);
                params.gamma = std::pow(2.0, ge);
                params.tol = cfg.svm_tol;
                params.max_iter = cfg.svm_max_iter;

                PooledPredictions pooled;
                for (std::size_t f = 0; f < folds.size(); ++f) {
                    auto model = svm_train(train_slices[f], folds[f].train_y, params);
                    for (std::size_t i = 0; i < test_slices[f].size(); ++i) {
                        pooled.preds.push_back(model.predict(test_slices[f][i]));
                        pooled.labels.push_back(folds[f].test_y[i]);
                        pooled.users.push_back(folds[f].test_users[i]);
                        pooled.platforms.push_back(folds[f].test_platforms[i]);
                    }
                    pooled.fold_sizes.push_back(test_slices[f].size());
                }
                double score = selection_score(pooled, cfg.macro_f1);
                if (score > best_score) {
                    best_score = score;
                    best_pooled = std::move(pooled);
                    result.chosen_c_exp = ce;
                    result.chosen_gamma_exp = ge;
                    result.chosen_m = m;
                    result.selected_features = selected;
                }
            }
        }
    }

    if (!best_pooled.preds.empty()) {
        result.overall = f1_metrics(best_pooled.preds, best_pooled.labels, &best_pooled.users);
        if (cfg.macro_f1) result.overall.f1 = selection_score(best_pooled, true);
        result.android_only = platform_metrics(best_pooled, ingest::Platform::android);
        result.ios_only = platform_metrics(best_pooled, ingest::Platform::ios);
    }
    return result;
}

}  // namespace mobipred::learn
