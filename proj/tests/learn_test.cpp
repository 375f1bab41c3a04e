#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "mobipred/learn.hpp"
#include "mobipred/rng.hpp"
#include "oracles.hpp"

using namespace mobipred;
using adapt::FeatureMatrix;
using adapt::FeatureRow;
using ingest::Platform;
using learn::AdaptMode;
using learn::Scenario;

namespace {

FeatureRow canonical_row(double signal, int label, Platform p, const std::string& user,
                         Rng& rng) {
    FeatureRow r;
    r.values.assign(learn::kCanonicalDim, 0.0);
    r.values[0] = signal;
    for (std::size_t j = 1; j < learn::kLocationColumns; ++j) r.values[j] = rng.gauss();
    r.label = label;
    r.user_id = user;
    r.platform = p;
    return r;
}

// Both platforms share the class geometry on column 0 but the ios side is
// shifted by -4, placing ios improved rows exactly on android not-improved
// rows. Alignment must undo the shift before one boundary can serve both.
FeatureMatrix collision_cohort(std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix X;
    for (int u = 0; u < 20; ++u) {
        bool ios = u >= 10;
        bool improved = u % 10 < 5;
        std::string user = (ios ? "i" : "a") + std::to_string(u % 10);
        double mu = (improved ? 2.0 : -2.0) - (ios ? 4.0 : 0.0);
        for (int r = 0; r < 8; ++r)
            X.rows.push_back(canonical_row(mu, improved ? +1 : -1,
                                           ios ? Platform::ios : Platform::android, user, rng));
    }
    return X;
}

// Separable mixed-label cohort: every user carries both classes.
FeatureMatrix blob_cohort(int n_users, int rows_per_user, std::uint64_t seed) {
    Rng rng(seed);
    FeatureMatrix X;
    for (int u = 0; u < n_users; ++u) {
        Platform p = u % 2 == 0 ? Platform::android : Platform::ios;
        for (int r = 0; r < rows_per_user; ++r) {
            int label = r % 2 == 0 ? +1 : -1;
            X.rows.push_back(canonical_row(label * 2.0 + rng.gauss(0.0, 0.5), label, p,
                                           "u" + std::to_string(u), rng));
        }
    }
    return X;
}

learn::LearnConfig small_grid() {
    learn::LearnConfig cfg;
    cfg.c_exponents = {0, 5};
    cfg.gamma_exponents = {-5};
    cfg.feature_counts = {0};
    return cfg;
}

}  // namespace

TEST_CASE("f1 counts the improved class as positive with zero-safe ratios") {
    auto m = learn::f1_metrics({+1, +1, -1, -1, +1}, {+1, -1, -1, +1, +1});
    CHECK(m.counts.tp == 2);
    CHECK(m.counts.fp == 1);
    CHECK(m.counts.tn == 1);
    CHECK(m.counts.fn == 1);
    CHECK(m.precision == doctest::Approx(2.0 / 3.0));
    CHECK(m.recall == doctest::Approx(2.0 / 3.0));
    CHECK(m.f1 == doctest::Approx(2.0 / 3.0));

    // No positive predictions: precision and f1 collapse to zero.
    auto none_pred = learn::f1_metrics({-1, -1, -1}, {+1, -1, +1});
    CHECK(none_pred.precision == 0.0);
    CHECK(none_pred.recall == 0.0);
    CHECK(none_pred.f1 == 0.0);

    // No positive labels: recall denominator is zero.
    auto none_true = learn::f1_metrics({+1, -1}, {-1, -1});
    CHECK(none_true.recall == 0.0);
    CHECK(none_true.f1 == 0.0);

    auto perfect = learn::f1_metrics({+1, -1}, {+1, -1});
    CHECK(perfect.f1 == 1.0);

    std::vector<std::string> users = {"x", "x", "y"};
    auto per = learn::f1_metrics({+1, -1, +1}, {+1, +1, +1}, &users);
    CHECK(per.per_user.at("x").tp == 1);
    CHECK(per.per_user.at("x").fn == 1);
    CHECK(per.per_user.at("y").tp == 1);

    CHECK_THROWS_AS(learn::f1_metrics({}, {}), std::runtime_error);
    CHECK_THROWS_AS(learn::f1_metrics({1}, {1, -1}), std::runtime_error);
}

TEST_CASE("pearson agrees with the direct-summation oracle") {
    Rng rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> x(50), y(50);
        double slope = rng.uniform(-2.0, 2.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = rng.uniform(-5.0, 5.0);
            y[i] = slope * x[i] + rng.gauss(0.0, 3.0);
        }
        auto got = learn::pearson(x, y);
        auto want = oracles::pearson(x, y);
        CHECK(std::abs(got.r - want.r) < 1e-10);
        CHECK(std::abs(got.p - want.p) < 1e-10);
    }
}

TEST_CASE("pearson worked example and edge behavior") {
    auto res = learn::pearson({1, 2, 3, 4, 5}, {2, 1, 4, 3, 6});
    CHECK(res.r == doctest::Approx(0.8220).epsilon(1e-3));
    CHECK(res.p == doctest::Approx(0.0877).epsilon(2e-2));

    auto line = learn::pearson({1, 2, 3, 4}, {2, 4, 6, 8});
    CHECK(line.r == 1.0);
    CHECK(line.p == 0.0);
    auto anti = learn::pearson({1, 2, 3}, {3, 2, 1});
    CHECK(anti.r == -1.0);

    CHECK_THROWS_AS(learn::pearson({1, 2}, {3, 4}), std::runtime_error);
    CHECK_THROWS_AS(learn::pearson({1, 1, 1}, {1, 2, 3}), std::runtime_error);
    CHECK_THROWS_AS(learn::pearson({1, 2, 3}, {1, 2}), std::runtime_error);
}

TEST_CASE("correlation table marks degenerate strata unavailable") {
    std::vector<std::array<double, 8>> feats;
    std::vector<double> qids;
    std::vector<int> labels;
    for (int i = 0; i < 12; ++i) {
        double q = 4.0 + 2.0 * i;
        std::array<double, 8> f{};
        f[0] = 5.0;        // constant: undefined correlation
        f[5] = -q;         // entropy column anti-tracks the score
        f[7] = q;          // time home tracks the score exactly
        f[1] = std::sin(i * 1.7);
        feats.push_back(f);
        qids.push_back(q);
        labels.push_back(i < 4 ? +1 : -1);
    }
    auto table = learn::correlation_table(feats, qids, labels);
    REQUIRE(table.size() == 24);
    CHECK(table[0].stratum == "all");
    CHECK(table[8].stratum == "improved");
    CHECK(table[16].stratum == "not_improved");
    CHECK(table[0].feature == "location_variance");
    CHECK(table[7].feature == "time_home_frac");

    for (int s = 0; s < 3; ++s) {
        CHECK(!table[s * 8 + 0].available);  // constant column
        REQUIRE(table[s * 8 + 7].available);
        CHECK(table[s * 8 + 7].r == doctest::Approx(1.0));
        REQUIRE(table[s * 8 + 5].available);
        CHECK(table[s * 8 + 5].r == doctest::Approx(-1.0));
    }

    // Fewer than 3 improved rows: the whole stratum goes unavailable.
    labels.assign(12, -1);
    labels[0] = +1;
    labels[1] = +1;
    auto sparse = learn::correlation_table(feats, qids, labels);
    for (int f = 0; f < 8; ++f) CHECK(!sparse[8 + f].available);
    CHECK(sparse[7].available);
    CHECK(sparse[16 + 7].available);

    CHECK_THROWS_AS(learn::correlation_table(feats, {1.0}, labels), std::runtime_error);
}

TEST_CASE("scenario columns match the canonical layout") {
    using learn::scenario_columns;
    auto cols = [](std::initializer_list<std::size_t> v) { return std::vector<std::size_t>(v); };
    CHECK(scenario_columns(Scenario::qids_plus_baseline) == cols({16, 17}));
    CHECK(scenario_columns(Scenario::location) ==
          cols({0, 1, 2, 3, 4, 5, 6, 7}));
    CHECK(scenario_columns(Scenario::location_plus_location_baseline).size() == 16);
    CHECK(scenario_columns(Scenario::location_plus_qids_baseline) ==
          cols({0, 1, 2, 3, 4, 5, 6, 7, 17}));
    auto both = scenario_columns(Scenario::location_plus_both_baselines);
    CHECK(both.size() == 17);
    CHECK(std::find(both.begin(), both.end(), 16) == both.end());  // no interval score
    CHECK(both.back() == 17);
    CHECK(scenario_columns(Scenario::all).size() == learn::kCanonicalDim);

    for (Scenario s : learn::kAllScenarios)
        CHECK(learn::parse_scenario(learn::scenario_name(s)) == s);
    CHECK(learn::scenario_name(Scenario::all) == "all_features");
    CHECK(!learn::parse_scenario("everything"));

    for (AdaptMode m : {AdaptMode::none, AdaptMode::android_transformed,
                        AdaptMode::ios_transformed, AdaptMode::dual_transformed})
        CHECK(learn::parse_adapt_mode(learn::adapt_mode_name(m)) == m);
    CHECK(!learn::parse_adapt_mode("both"));
}

TEST_CASE("rfe ranks informative columns ahead of noise") {
    // XOR labels make columns 0 and 3 jointly necessary: dropping either one
    // destroys separability, while dropping a noise column changes nothing.
    // Two redundant copies of one signal would not work here, because the
    // margin criterion correctly treats a duplicated column as expendable.
    Rng rng(47);
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
        int a = (i >> 1) % 2 ? +1 : -1;
        int b = i % 2 ? +1 : -1;
        std::vector<double> row(6);
        for (auto& v : row) v = rng.gauss();
        row[0] = a * 1.5 + rng.gauss(0.0, 0.3);
        row[3] = b * 1.5 + rng.gauss(0.0, 0.3);
        X.push_back(std::move(row));
        y.push_back(a * b);
    }
    auto order = learn::svm_rfe_rank(X, y, {{1.0, 0.25}, {4.0, 0.1}});
    REQUIRE(order.size() == 6);
    std::set<std::size_t> top = {order[0], order[1]};
    CHECK(top == std::set<std::size_t>{0, 3});
    std::set<std::size_t> all(order.begin(), order.end());
    CHECK(all.size() == 6);  // a permutation, no repeats

    CHECK_THROWS_AS(learn::svm_rfe_rank(X, y, {}), std::runtime_error);
    CHECK_THROWS_AS(learn::svm_rfe_rank({{1.0}, {2.0}}, {1, -1}, {{1.0, 1.0}}),
                    std::runtime_error);
}

TEST_CASE("rfe breaks exact ties by ascending index") {
    // Three identical columns: elimination must walk them front to back.
    std::vector<std::vector<double>> X;
    std::vector<int> y;
    Rng rng(53);
    for (int i = 0; i < 20; ++i) {
        int label = i % 2 == 0 ? +1 : -1;
        double v = label + rng.gauss(0.0, 0.2);
        X.push_back({v, v, v});
        y.push_back(label);
    }
    auto order = learn::svm_rfe_rank(X, y, {{1.0, 0.5}});
    REQUIRE(order.size() == 3);
    CHECK(order[0] == 2);  // survived both eliminations
    CHECK(order[1] == 1);
    CHECK(order[2] == 0);
}

TEST_CASE("leave-one-user-out evaluates every user once without leakage") {
    auto X = blob_cohort(6, 6, 61);
    auto cfg = small_grid();
    auto res = learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, cfg, 17);
    CHECK(res.n_folds == 6);
    CHECK(res.skipped_folds == 0);
    CHECK(res.leakage_violations == 0);
    CHECK(res.overall.counts.total() == 36);  // every row predicted exactly once
    CHECK(res.overall.f1 > 0.9);              // blobs are 4 sigma apart
    CHECK(res.android_only.counts.total() + res.ios_only.counts.total() ==
          res.overall.counts.total());
    CHECK((res.chosen_c_exp == 0 || res.chosen_c_exp == 5));
    CHECK(res.chosen_gamma_exp == -5);
    CHECK(res.chosen_m == 8);  // feature_counts {0} means all scenario columns
    CHECK(res.selected_features.size() == res.chosen_m);
    CHECK(res.ranked_features.size() == 8);

    auto again = learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, cfg, 17);
    CHECK(again.overall.counts.tp == res.overall.counts.tp);
    CHECK(again.overall.counts.fp == res.overall.counts.fp);
    CHECK(again.overall.counts.tn == res.overall.counts.tn);
    CHECK(again.overall.counts.fn == res.overall.counts.fn);
    CHECK(again.chosen_c_exp == res.chosen_c_exp);
}

TEST_CASE("folds whose training side is single-class are skipped") {
    Rng rng(71);
    FeatureMatrix X;
    for (int u = 0; u < 4; ++u) {
        int label = u == 0 ? -1 : +1;  // u0 holds every negative row
        for (int r = 0; r < 6; ++r)
            X.rows.push_back(canonical_row(label * 2.0 + rng.gauss(0.0, 0.5), label,
                                           Platform::android, "u" + std::to_string(u), rng));
    }
    DiagLog diag;
    auto res =
        learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, small_grid(), 3, &diag);
    CHECK(res.n_folds == 3);
    CHECK(res.skipped_folds == 1);
    bool noted = false;
    for (const auto& line : diag.lines())
        if (line.find("fold_skipped") != std::string::npos) noted = true;
    CHECK(noted);
}

TEST_CASE("harness rejects malformed evaluation requests") {
    auto X = blob_cohort(3, 4, 5);
    learn::LearnConfig no_grid;
    CHECK_THROWS_AS(
        learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, no_grid, 1),
        std::runtime_error);

    FeatureMatrix narrow;
    Rng rng(1);
    narrow.rows.push_back(canonical_row(1.0, 1, Platform::android, "a", rng));
    narrow.rows.front().values.resize(4);
    CHECK_THROWS_AS(learn::louo_cross_validate(narrow, Scenario::location, AdaptMode::none,
                                               small_grid(), 1),
                    std::runtime_error);

    FeatureMatrix solo;
    for (int r = 0; r < 4; ++r)
        solo.rows.push_back(canonical_row(r % 2 ? 2.0 : -2.0, r % 2 ? 1 : -1,
                                          Platform::android, "only", rng));
    CHECK_THROWS_AS(
        learn::louo_cross_validate(solo, Scenario::location, AdaptMode::none, small_grid(), 1),
        std::runtime_error);
}

TEST_CASE("macro averaging and nested selection run end to end") {
    auto X = blob_cohort(8, 6, 83);
    auto cfg = small_grid();
    cfg.macro_f1 = true;
    auto macro = learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, cfg, 9);
    CHECK(macro.n_folds == 8);
    CHECK(macro.overall.f1 >= 0.0);
    CHECK(macro.overall.f1 <= 1.0);
    CHECK(macro.overall.counts.total() == 48);  // counts stay pooled

    cfg.macro_f1 = false;
    cfg.nested_cv = true;
    cfg.c_exponents = {0};
    auto nested = learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, cfg, 9);
    CHECK(nested.n_folds == 8);
    CHECK(nested.leakage_violations == 0);
    CHECK(nested.overall.counts.total() == 48);
    CHECK(nested.overall.f1 > 0.8);
}

TEST_CASE("covariance alignment recovers the cross-platform class collision") {
    auto cfg = small_grid();
    double none_sum = 0.0, dual_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto X = collision_cohort(seed);
        auto none =
            learn::louo_cross_validate(X, Scenario::location, AdaptMode::none, cfg, seed);
        auto dual = learn::louo_cross_validate(X, Scenario::location,
                                               AdaptMode::dual_transformed, cfg, seed);
        CHECK(none.leakage_violations == 0);
        CHECK(dual.leakage_violations == 0);
        none_sum += none.overall.f1;
        dual_sum += dual.overall.f1;
    }
    double none_mean = none_sum / 10.0;
    double dual_mean = dual_sum / 10.0;
    CHECK(dual_mean >= 0.99);               // alignment makes the cohort separable
    CHECK(dual_mean - none_mean >= 0.02);   // and beats the unaligned baseline
}
