#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>

#include "dlcast/csv.hpp"
#include "dlcast/errors.hpp"
#include "dlcast/metrics.hpp"
#include "dlcast/model_io.hpp"
#include "dlcast/pipeline.hpp"
#include "dlcast/synth.hpp"
#include "dlcast/treeshap.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dlcast;

namespace {

Tech tech_from(const std::string& s) {
    auto t = parse_tech(s);
    if (!t) throw ConfigError("unknown tech '" + s + "' (expected LTE, NR_NSA or NR_SA)");
    return *t;
}

Exec pick_exec(bool serial, int threads) {
    if (threads > 0) set_threads(threads);
    return serial ? Exec::Serial : Exec::Parallel;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("failed while writing '" + path + "'");
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(); }

struct SynthArgs {
    std::string tech = "NR_SA";
    std::size_t rows = 1000;
    std::uint64_t seed = 0;
    int span_weeks = 16;
    double missing_rate = 0.0;
    bool homoscedastic = false;
    std::string out;
    std::string truth_out;
};

void do_synth(const SynthArgs& a) {
    GeneratorConfig gc;
    gc.tech = tech_from(a.tech);
    gc.n_rows = a.rows;
    gc.seed = a.seed;
    gc.span_weeks = a.span_weeks;
    gc.missing_rates.fill(a.missing_rate);
    gc.homoscedastic = a.homoscedastic;
    SynthResult res = generate(gc);
    write_csv_file(a.out, res.records);
    const std::string tpath = a.truth_out.empty() ? a.out + ".truth.csv" : a.truth_out;
    write_truth_csv(tpath, res.truth);
    std::printf("wrote %zu rows to %s (truth: %s)\n", res.records.size(), a.out.c_str(),
                tpath.c_str());
}

struct SplitArgs {
    std::string input;
    int val_weeks = 1;
    int test_weeks = 2;
    std::string out_dir;
    std::int64_t tz = 0;
};

void do_split(const SplitArgs& a) {
    IngestResult ing = ingest_csv_file(a.input, nullptr, a.tz);
    SplitResult parts = temporal_split(ing.data, a.val_weeks, a.test_weeks);
    std::error_code ec;
    fs::create_directories(a.out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + a.out_dir + "'");
    const fs::path dir(a.out_dir);
    write_csv_file((dir / "train.csv").string(), records_from_dataset(parts.train));
    write_csv_file((dir / "val.csv").string(), records_from_dataset(parts.val));
    write_csv_file((dir / "test.csv").string(), records_from_dataset(parts.test));
    std::printf("split %zu rows: train=%zu val=%zu test=%zu (dropped %zu with missing target)\n",
                ing.data.n_rows(), parts.train.n_rows(), parts.val.n_rows(), parts.test.n_rows(),
                ing.rows_dropped_missing_target);
}

struct TrainArgs {
    std::string train_path;
    std::string val_path;
    std::string model;
    std::string out;
    int max_depth = -1;
    double learning_rate = -1.0;
    int max_iters = -1;
    int patience = -1;
    int min_samples_leaf = -1;
    std::int64_t tz = 0;
    bool serial = false;
    int threads = 0;
};

template <class Cfg>
Cfg apply_overrides(Cfg cfg, const TrainArgs& a) {
    if (a.max_depth >= 0) cfg.max_depth = a.max_depth;
    if (a.learning_rate > 0.0) cfg.learning_rate = a.learning_rate;
    if (a.max_iters >= 0) cfg.max_iters = a.max_iters;
    if (a.patience >= 0) cfg.patience = a.patience;
    if (a.min_samples_leaf >= 1) cfg.min_samples_leaf = a.min_samples_leaf;
    return cfg;
}

void do_train(const TrainArgs& a) {
    const Exec exec = pick_exec(a.serial, a.threads);
    IngestResult tr = ingest_csv_file(a.train_path, nullptr, a.tz);
    IngestResult va = ingest_csv_file(a.val_path, &tr.data.encoders, a.tz);
    const TargetTransform t = fit_transform(tr.data.target_kbps);
    standardize(tr.data, t);
    standardize(va.data, t);
    ModelMeta meta{tr.data.encoders, t, a.tz};
    if (a.model == "point") {
        const PointConfig cfg = apply_overrides(PointConfig{}, a);
        PointBooster b = fit_point_booster(tr.data, va.data, cfg, exec);
        const double val = b.val_rmse_history[static_cast<std::size_t>(b.best_iteration)];
        save_model(PointModel{b, cfg, meta}, a.out);
        std::printf("point model: best_iteration=%d val_rmse=%.6f -> %s\n", b.best_iteration, val,
                    a.out.c_str());
    } else if (a.model == "dist") {
        const DistConfig cfg = apply_overrides(DistConfig{}, a);
        DistBooster b = fit_dist_booster(tr.data, va.data, cfg, exec);
        const double val = b.val_nll_history[static_cast<std::size_t>(b.best_iteration)];
        save_model(DistModel{b, cfg, meta}, a.out);
        std::printf("dist model: best_iteration=%d val_nll=%.6f -> %s\n", b.best_iteration, val,
                    a.out.c_str());
    } else {
        throw ConfigError("model must be 'point' or 'dist'");
    }
}

struct EvalArgs {
    std::string model_path;
    std::string data_path;
    std::string out;
    std::string calibration_out;
    bool serial = false;
    int threads = 0;
};

void do_evaluate(const EvalArgs& a) {
    const Exec exec = pick_exec(a.serial, a.threads);
    AnyModel m = load_model(a.model_path);
    const ModelMeta& meta =
        std::holds_alternative<PointModel>(m) ? std::get<PointModel>(m).meta : std::get<DistModel>(m).meta;
    IngestResult ing = ingest_csv_file(a.data_path, &meta.encoders, meta.tz_offset_seconds);
    standardize(ing.data, meta.transform);
    const Dataset& ds = ing.data;

    json jr;
    jr["format_version"] = 1;
    jr["rows"] = ds.n_rows();
    jr["dropped_missing_target"] = ing.rows_dropped_missing_target;
    if (const auto* pm = std::get_if<PointModel>(&m)) {
        if (!a.calibration_out.empty())
            throw ConfigError("calibration output requires a dist model");
        auto pred = predict_point(pm->booster, ds.features, exec);
        PointMetrics met = point_metrics(ds.target, pred, meta.transform);
        jr["model"] = "point";
        jr["best_iteration"] = pm->booster.best_iteration;
        jr["mae_std"] = jnum(met.mae_std);
        jr["rmse_std"] = jnum(met.rmse_std);
        jr["mae_kbps"] = jnum(met.mae_kbps);
        jr["rmse_kbps"] = jnum(met.rmse_kbps);
        jr["r2"] = met.r2 ? jnum(*met.r2) : json();
        jr["crps_std"] = jnum(crps_mean(pred, ds.target));
        jr["c_auc"] = nullptr;
        jr["coverage95"] = nullptr;
    } else {
        const auto& dm = std::get<DistModel>(m);
        auto params = predict_dist(dm.booster, ds.features, exec);
        std::vector<double> mu(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) mu[i] = params[i].mu;
        PointMetrics met = point_metrics(ds.target, mu, meta.transform);
        CalibrationCurve curve = calibration_curve(params, ds.target);
        jr["model"] = "dist";
        jr["best_iteration"] = dm.booster.best_iteration;
        jr["mae_std"] = jnum(met.mae_std);
        jr["rmse_std"] = jnum(met.rmse_std);
        jr["mae_kbps"] = jnum(met.mae_kbps);
        jr["rmse_kbps"] = jnum(met.rmse_kbps);
        jr["r2"] = met.r2 ? jnum(*met.r2) : json();
        jr["crps_std"] = jnum(crps_mean(params, ds.target));
        jr["c_auc"] = jnum(c_auc(curve));
        jr["coverage95"] = jnum(interval_coverage(params, ds.target, 0.95));
        if (!a.calibration_out.empty()) {
            write_file(a.calibration_out, calibration_csv(curve));
            std::printf("wrote calibration curve to %s\n", a.calibration_out.c_str());
        }
    }
    const std::string text = jr.dump(2) + "\n";
    if (a.out.empty()) {
        std::fputs(text.c_str(), stdout);
    } else {
        write_file(a.out, text);
        std::printf("wrote metrics to %s\n", a.out.c_str());
    }
}

struct ExplainArgs {
    std::string model_path;
    std::string data_path;
    std::string out;
    std::string head = "mu";
    std::size_t cap = 20000;
    bool serial = false;
    int threads = 0;
};

void do_explain(const ExplainArgs& a) {
    const Exec exec = pick_exec(a.serial, a.threads);
    if (a.head != "mu" && a.head != "sigma")
        throw ConfigError("head must be 'mu' or 'sigma'");
    AnyModel m = load_model(a.model_path);
    const ModelMeta& meta =
        std::holds_alternative<PointModel>(m) ? std::get<PointModel>(m).meta : std::get<DistModel>(m).meta;
    IngestResult ing = ingest_csv_file(a.data_path, &meta.encoders, meta.tz_offset_seconds);
    if (a.cap == 0) throw ConfigError("cap must be at least 1");
    auto idx = stride_sample(ing.data.n_rows(), a.cap);
    Dataset ex = subset(ing.data, idx);

    ImportanceReport rep;
    if (const auto* pm = std::get_if<PointModel>(&m)) {
        if (a.head == "sigma") throw ConfigError("point models have a single head");
        rep = importance_report(pm->booster, ex, exec);
    } else {
        const auto& dm = std::get<DistModel>(m);
        rep = importance_report(dm.booster, a.head == "mu" ? DistHead::Mu : DistHead::LogSigma, ex,
                                exec);
    }
    std::ostringstream os;
    write_importance_csv(os, rep);
    write_file(a.out, os.str());
    std::printf("explained %zu rows (e2e/radio ratio %.4f) -> %s\n", ex.n_rows(),
                rep.e2e_radio_ratio, a.out.c_str());
}

struct RunArgs {
    std::string input;
    bool synth = false;
    std::string synth_tech = "NR_SA";
    std::size_t synth_rows = 1000;
    std::uint64_t synth_seed = 0;
    int synth_span_weeks = 16;
    double synth_missing_rate = 0.0;
    bool synth_homoscedastic = false;
    std::string tech_filter;
    std::string models = "both";
    TrainArgs point;
    TrainArgs dist;
    int val_weeks = 1;
    int test_weeks = 2;
    std::string out_dir;
    std::size_t explain_cap = 20000;
    std::int64_t tz = 0;
    bool serial = false;
    int threads = 0;
};

void do_run(const RunArgs& a) {
    PipelineConfig pc;
    if (!a.input.empty()) pc.input_csv = a.input;
    if (a.synth) {
        GeneratorConfig gc;
        gc.tech = tech_from(a.synth_tech);
        gc.n_rows = a.synth_rows;
        gc.seed = a.synth_seed;
        gc.span_weeks = a.synth_span_weeks;
        gc.missing_rates.fill(a.synth_missing_rate);
        gc.homoscedastic = a.synth_homoscedastic;
        pc.synth = gc;
    }
    if (!a.tech_filter.empty()) pc.tech_filter = tech_from(a.tech_filter);
    if (a.models == "point") {
        pc.models = ModelSelection::Point;
    } else if (a.models == "dist") {
        pc.models = ModelSelection::Dist;
    } else if (a.models == "both") {
        pc.models = ModelSelection::Both;
    } else {
        throw ConfigError("models must be 'point', 'dist' or 'both'");
    }
    pc.point = apply_overrides(PointConfig{}, a.point);
    pc.dist = apply_overrides(DistConfig{}, a.dist);
    pc.val_weeks = a.val_weeks;
    pc.test_weeks = a.test_weeks;
    pc.out_dir = a.out_dir;
    pc.explain_cap = a.explain_cap;
    pc.tz_offset_seconds = a.tz;
    pc.exec = pick_exec(a.serial, a.threads);

    RunResult res = run_pipeline(pc);
    std::fputs(res.summary.c_str(), stdout);
    std::printf("\nartifacts in %s:\n", a.out_dir.c_str());
    for (const auto& p : res.artifacts) std::printf("  %s\n", p.c_str());
}

void add_exec_flags(CLI::App* cmd, bool& serial, int& threads) {
    cmd->add_flag("--serial", serial, "run data-parallel kernels on one thread");
    cmd->add_option("--threads", threads, "worker thread count (0 = library default)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"uncertainty-aware downlink throughput characterization"};
    app.require_subcommand(1);

    SynthArgs sa;
    auto* synth = app.add_subcommand("synth", "generate a synthetic measurement CSV");
    synth->add_option("--tech", sa.tech, "LTE|NR_NSA|NR_SA")->capture_default_str();
    synth->add_option("--rows", sa.rows, "rows to generate")->capture_default_str();
    synth->add_option("--seed", sa.seed, "generator seed")->capture_default_str();
    synth->add_option("--span-weeks", sa.span_weeks, "timestamp span")->capture_default_str();
    synth->add_option("--missing-rate", sa.missing_rate, "per-cell missing probability")
        ->capture_default_str();
    synth->add_flag("--homoscedastic", sa.homoscedastic, "freeze sigma(x) at the base value");
    synth->add_option("--out", sa.out, "output CSV path")->required();
    synth->add_option("--truth-out", sa.truth_out, "ground-truth CSV path (default <out>.truth.csv)");
    synth->callback([&] { do_synth(sa); });

    SplitArgs pa;
    auto* split = app.add_subcommand("split", "temporal train/val/test split of a CSV");
    split->add_option("--input", pa.input, "measurement CSV")->required();
    split->add_option("--val-weeks", pa.val_weeks, "validation window")->capture_default_str();
    split->add_option("--test-weeks", pa.test_weeks, "test window")->capture_default_str();
    split->add_option("--out-dir", pa.out_dir, "directory for train/val/test.csv")->required();
    split->add_option("--tz-offset-seconds", pa.tz, "context timezone offset")->capture_default_str();
    split->callback([&] { do_split(pa); });

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "fit a model on pre-split CSVs");
    train->add_option("--train", ta.train_path, "training CSV")->required();
    train->add_option("--val", ta.val_path, "validation CSV")->required();
    train->add_option("--model", ta.model, "point|dist")->required();
    train->add_option("--out", ta.out, "model JSON path")->required();
    train->add_option("--max-depth", ta.max_depth, "tree depth override");
    train->add_option("--learning-rate", ta.learning_rate, "learning rate override");
    train->add_option("--max-iters", ta.max_iters, "iteration cap override");
    train->add_option("--patience", ta.patience, "early-stopping patience override");
    train->add_option("--min-samples-leaf", ta.min_samples_leaf, "leaf size override");
    train->add_option("--tz-offset-seconds", ta.tz, "context timezone offset")->capture_default_str();
    add_exec_flags(train, ta.serial, ta.threads);
    train->callback([&] { do_train(ta); });

    EvalArgs ea;
    auto* evaluate = app.add_subcommand("evaluate", "score a model on a CSV");
    evaluate->add_option("--model", ea.model_path, "model JSON path")->required();
    evaluate->add_option("--data", ea.data_path, "evaluation CSV")->required();
    evaluate->add_option("--out", ea.out, "metrics JSON path (default stdout)");
    evaluate->add_option("--calibration-out", ea.calibration_out, "calibration CSV path (dist only)");
    add_exec_flags(evaluate, ea.serial, ea.threads);
    evaluate->callback([&] { do_evaluate(ea); });

    ExplainArgs xa;
    auto* explain = app.add_subcommand("explain", "feature importance on a CSV");
    explain->add_option("--model", xa.model_path, "model JSON path")->required();
    explain->add_option("--data", xa.data_path, "explanation CSV")->required();
    explain->add_option("--out", xa.out, "importance CSV path")->required();
    explain->add_option("--head", xa.head, "mu|sigma (dist models)")->capture_default_str();
    explain->add_option("--cap", xa.cap, "explanation row cap")->capture_default_str();
    add_exec_flags(explain, xa.serial, xa.threads);
    explain->callback([&] { do_explain(xa); });

    RunArgs ra;
    auto* run = app.add_subcommand("run", "full pipeline: ingest, split, train, evaluate, explain");
    run->add_option("--input", ra.input, "measurement CSV (alternative to --synth)");
    run->add_flag("--synth", ra.synth, "generate the input instead of reading a CSV");
    run->add_option("--synth-tech", ra.synth_tech, "LTE|NR_NSA|NR_SA")->capture_default_str();
    run->add_option("--synth-rows", ra.synth_rows, "rows to generate")->capture_default_str();
    run->add_option("--synth-seed", ra.synth_seed, "generator seed")->capture_default_str();
    run->add_option("--synth-span-weeks", ra.synth_span_weeks, "timestamp span")
        ->capture_default_str();
    run->add_option("--synth-missing-rate", ra.synth_missing_rate, "per-cell missing probability")
        ->capture_default_str();
    run->add_flag("--synth-homoscedastic", ra.synth_homoscedastic,
                  "freeze sigma(x) at the base value");
    run->add_option("--tech-filter", ra.tech_filter, "keep only one technology (CSV input)");
    run->add_option("--models", ra.models, "point|dist|both")->capture_default_str();
    run->add_option("--point-max-depth", ra.point.max_depth, "point tree depth");
    run->add_option("--point-learning-rate", ra.point.learning_rate, "point learning rate");
    run->add_option("--point-max-iters", ra.point.max_iters, "point iteration cap");
    run->add_option("--point-patience", ra.point.patience, "point early-stopping patience");
    run->add_option("--point-min-samples-leaf", ra.point.min_samples_leaf, "point leaf size");
    run->add_option("--dist-max-depth", ra.dist.max_depth, "dist tree depth");
    run->add_option("--dist-learning-rate", ra.dist.learning_rate, "dist learning rate");
    run->add_option("--dist-max-iters", ra.dist.max_iters, "dist iteration cap");
    run->add_option("--dist-patience", ra.dist.patience, "dist early-stopping patience");
    run->add_option("--dist-min-samples-leaf", ra.dist.min_samples_leaf, "dist leaf size");
    run->add_option("--val-weeks", ra.val_weeks, "validation window")->capture_default_str();
    run->add_option("--test-weeks", ra.test_weeks, "test window")->capture_default_str();
    run->add_option("--out-dir", ra.out_dir, "artifact directory")->required();
    run->add_option("--explain-cap", ra.explain_cap, "explanation row cap")->capture_default_str();
    run->add_option("--tz-offset-seconds", ra.tz, "context timezone offset")->capture_default_str();
    add_exec_flags(run, ra.serial, ra.threads);
    run->callback([&] { do_run(ra); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const TrainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 5;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "internal error: %s\n", e.what());
        return 1;
    }
    return 0;
}
