#include <CLI11.hpp>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "mobipred/csv.hpp"
#include "mobipred/pipeline.hpp"

namespace fs = std::filesystem;
using namespace mobipred;

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = "out";
    std::string modes;
    std::string scenarios;
    std::string manifest;
    bool force_synth = false;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_eval_flags) {
    cmd->add_option("--config", args.config_path, "Flat key=value config file");
    cmd->add_option("--out", args.out_dir, "Output directory");
    auto* seed_opt = cmd->add_option("--seed", args.seed, "Random seed (overrides config)");
    seed_opt->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_option("--manifest", args.manifest, "Cohort manifest path (overrides config)");
    cmd->add_flag("--synth", args.force_synth,
                  "Generate the synthetic cohort even if the config names a manifest");
    if (with_eval_flags) {
        cmd->add_option("--mode", args.modes,
                        "Comma list of adaptation modes (none, android, ios, dual)");
        cmd->add_option("--scenario", args.scenarios,
                        "Comma list of scenarios, or 'all' for every scenario");
    }
}

std::string expand_modes(const std::string& tokens) {
    std::string out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (cur == "dual") cur = "dual_transformed";
        if (cur == "android") cur = "android_transformed";
        if (cur == "ios") cur = "ios_transformed";
        if (!out.empty()) out += ',';
        out += cur;
        cur.clear();
    };
    for (char c : tokens) {
        if (c == ',')
            flush();
        else
            cur += c;
    }
    flush();
    return out;
}

pipeline::PipelineConfig resolve_config(const CommonArgs& args) {
    Config cfg = args.config_path.empty() ? Config() : Config::from_file(args.config_path);
    cfg.apply_env_overrides();
    if (!args.manifest.empty()) cfg.set("input.manifest", args.manifest);
    if (args.force_synth) cfg.set("input.manifest", "");
    if (!args.modes.empty()) cfg.set("eval.modes", expand_modes(args.modes));
    if (!args.scenarios.empty()) cfg.set("eval.scenarios", args.scenarios);
    pipeline::PipelineConfig p = pipeline::load_pipeline_config(cfg);
    if (args.seed_set) p.seed = args.seed;
    p.out_dir = args.out_dir;
    return p;
}

void print_results(const std::vector<pipeline::EvaluationRow>& rows) {
    for (const auto& row : rows)
        std::cout << learn::scenario_name(row.scenario) << " / "
                  << learn::adapt_mode_name(row.mode) << ": F1=" << row.result.overall.f1
                  << " precision=" << row.result.overall.precision
                  << " recall=" << row.result.overall.recall
                  << " (android F1=" << row.result.android_only.f1
                  << ", ios F1=" << row.result.ios_only.f1
                  << ", folds=" << row.result.n_folds
                  << ", skipped=" << row.result.skipped_folds << ")\n";
}

int cmd_synth(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    synth::SynthCohort cohort = synth::generate_cohort(cfg.synth_spec, cfg.seed);
    std::string manifest = synth::write_cohort(cohort, cfg.out_dir);
    std::cout << "wrote " << manifest << " (users=" << cohort.cohort.users.size()
              << ", locations=" << cohort.cohort.locations.size()
              << ", wifi=" << cohort.cohort.wifi.size() << ")\n";
    return 0;
}

int cmd_fuse(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    pipeline::Pipeline pipe(cfg);
    pipe.acquire_cohort();
    pipe.fuse_all();
    fs::create_directories(cfg.out_dir);
    fs::path base(cfg.out_dir);
    pipeline::write_windows_csv(pipe.fused(), (base / "windows.csv").string());
    pipeline::write_track_csv(pipe.fused(), (base / "track.csv").string());
    pipeline::write_ap_csv(pipe.fused(), (base / "ap_locations.csv").string());
    pipeline::write_exclusions_log(pipe.diag(), (base / "exclusions.log").string());
    for (const auto& line : pipe.stage_log()) std::cout << line << '\n';
    return 0;
}

int cmd_features(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    pipeline::Pipeline pipe(cfg);
    pipe.acquire_cohort();
    pipe.fuse_all();
    pipe.build_table();
    fs::create_directories(cfg.out_dir);
    fs::path base(cfg.out_dir);
    pipeline::write_features_csv(pipe.table(), (base / "features.csv").string());
    pipeline::write_intervals_csv(pipe.table(), (base / "intervals.csv").string());
    pipeline::write_exclusions_log(pipe.diag(), (base / "exclusions.log").string());
    for (const auto& line : pipe.stage_log()) std::cout << line << '\n';
    return 0;
}

int cmd_adapt_diag(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    pipeline::Pipeline pipe(cfg);
    pipe.acquire_cohort();
    pipe.fuse_all();
    pipe.build_table();
    fs::create_directories(cfg.out_dir);
    std::ofstream out(fs::path(cfg.out_dir) / "adaptation_diag.csv");
    out << "mode,pre_frobenius,post_frobenius\n";
    for (const auto& [mode, d] : pipe.adaptation_report()) {
        out << learn::adapt_mode_name(mode) << ',' << format_double(d.pre_frobenius) << ','
            << format_double(d.post_frobenius) << '\n';
        std::cout << learn::adapt_mode_name(mode) << ": ||C_a - C_i||_F pre=" << d.pre_frobenius
                  << " post=" << d.post_frobenius << '\n';
    }
    return 0;
}

int cmd_evaluate(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    std::vector<pipeline::EvaluationRow> results;
    int rc = pipeline::run_pipeline(cfg, &results);
    print_results(results);
    std::cout << "report: " << (fs::path(cfg.out_dir) / "report.json").string() << '\n';
    return rc;
}

int cmd_compare(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    std::vector<pipeline::EvaluationRow> results;
    int rc = pipeline::compare_modes(cfg, &results);
    print_results(results);
    std::cout << "comparison: " << (fs::path(cfg.out_dir) / "mode_comparison.csv").string()
              << '\n';
    return rc;
}

int cmd_correlate(const CommonArgs& args) {
    pipeline::PipelineConfig cfg = resolve_config(args);
    pipeline::Pipeline pipe(cfg);
    pipe.acquire_cohort();
    pipe.fuse_all();
    pipe.build_table();
    fs::create_directories(cfg.out_dir);
    auto rows = pipe.correlations();
    pipeline::write_correlations_csv(rows, (fs::path(cfg.out_dir) / "correlations.csv").string());
    for (const auto& row : rows) {
        std::cout << row.feature << " [" << row.stratum << "]: ";
        if (row.available)
            std::cout << "r=" << row.r << " p=" << row.p << '\n';
        else
            std::cout << "unavailable\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Location-based depression-outcome prediction pipeline"};
    app.footer(
        "Every config key can be overridden via environment variables with the\n"
        "MOBIPRED_ prefix, dots replaced by underscores: learn.svm_tol ->\n"
        "MOBIPRED_LEARN_SVM_TOL.");
    app.require_subcommand(1);

    CommonArgs args;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic cohort as ingest CSVs");
    add_common(synth_cmd, args, false);
    auto* fuse_cmd = app.add_subcommand("fuse", "Fuse GPS and WiFi into minute tracks");
    add_common(fuse_cmd, args, false);
    auto* features_cmd =
        app.add_subcommand("features", "Extract interval mobility features");
    add_common(features_cmd, args, false);
    auto* adapt_cmd =
        app.add_subcommand("adapt-diag", "Report covariance alignment per adaptation mode");
    add_common(adapt_cmd, args, false);
    auto* eval_cmd = app.add_subcommand("evaluate", "Run the full pipeline and write report.json");
    add_common(eval_cmd, args, true);
    auto* compare_cmd =
        app.add_subcommand("compare-modes", "Evaluate every configured adaptation mode");
    add_common(compare_cmd, args, true);
    auto* correlate_cmd =
        app.add_subcommand("correlate", "Feature/QIDS correlation table with p-values");
    add_common(correlate_cmd, args, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth_cmd->parsed()) return cmd_synth(args);
        if (fuse_cmd->parsed()) return cmd_fuse(args);
        if (features_cmd->parsed()) return cmd_features(args);
        if (adapt_cmd->parsed()) return cmd_adapt_diag(args);
        if (eval_cmd->parsed()) return cmd_evaluate(args);
        if (compare_cmd->parsed()) return cmd_compare(args);
        if (correlate_cmd->parsed()) return cmd_correlate(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
