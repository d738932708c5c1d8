#include "dlcast/pipeline.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "dlcast/csv.hpp"
#include "dlcast/errors.hpp"
#include "dlcast/metrics.hpp"
#include "dlcast/model_io.hpp"
#include "dlcast/treeshap.hpp"

namespace dlcast {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
auto with_stage(const char* stage, F&& f) -> decltype(f()) {
    auto tag = [&](const char* what) { return "[" + std::string(stage) + "] " + what; };
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e.what()));
    } catch (const DataError& e) {
        throw DataError(tag(e.what()));
    } catch (const TrainError& e) {
        throw TrainError(tag(e.what()));
    } catch (const IoError& e) {
        throw IoError(tag(e.what()));
    }
}

// Removes everything this run wrote unless the run reached commit().
struct ArtifactGuard {
    std::vector<fs::path> files;
    bool committed = false;

    ArtifactGuard() = default;
    ArtifactGuard(const ArtifactGuard&) = delete;
    ArtifactGuard& operator=(const ArtifactGuard&) = delete;
    ~ArtifactGuard() {
        if (committed) return;
        for (const auto& p : files) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
};

void write_file(const fs::path& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

Dataset filter_tech(const Dataset& ds, Tech t) {
    const std::string label(tech_label(t));
    const std::size_t code = ds.encoders.tech.encode_frozen(label);
    std::vector<std::size_t> rows;
    if (code != ds.encoders.tech.unseen_code()) {
        for (std::size_t i = 0; i < ds.n_rows(); ++i) {
            if (static_cast<std::size_t>(ds.features.at(i, feat::tech)) == code) rows.push_back(i);
        }
    }
    if (rows.empty()) throw DataError("tech filter '" + label + "' matched no rows");
    return subset(ds, rows);
}

json jnum(double v) { return std::isfinite(v) ? json(v) : json(); }

struct EvalRow {
    std::string model;
    PointMetrics pm;
    double crps_std = 0.0;
    std::optional<double> cauc;
    std::optional<double> cov95;
    std::optional<double> ratio_mu;
    std::optional<double> ratio_sigma;
    int best_iteration = 0;
};

std::string num_cell(double v, int width, int prec) {
    char b[64];
    std::snprintf(b, sizeof b, "%*.*f", width, prec, v);
    return b;
}

std::string dash_cell(int width) {
    char b[64];
    std::snprintf(b, sizeof b, "%*s", width, "-");
    return b;
}

json config_echo(const PipelineConfig& cfg) {
    json jc;
    jc["input"] = cfg.input_csv ? json(*cfg.input_csv) : json();
    if (cfg.synth) {
        json js;
        js["tech"] = std::string(tech_label(cfg.synth->tech));
        js["rows"] = cfg.synth->n_rows;
        js["seed"] = cfg.synth->seed;
        js["span_weeks"] = cfg.synth->span_weeks;
        js["missing_rates"] = cfg.synth->missing_rates;
        js["homoscedastic"] = cfg.synth->homoscedastic;
        jc["synth"] = js;
    } else {
        jc["synth"] = nullptr;
    }
    jc["tech_filter"] = cfg.tech_filter ? json(std::string(tech_label(*cfg.tech_filter))) : json();
    jc["models"] = cfg.models == ModelSelection::Point  ? "point"
                   : cfg.models == ModelSelection::Dist ? "dist"
                                                        : "both";
    jc["point"] = {{"max_depth", cfg.point.max_depth},
                   {"learning_rate", cfg.point.learning_rate},
                   {"max_iters", cfg.point.max_iters},
                   {"patience", cfg.point.patience},
                   {"min_samples_leaf", cfg.point.min_samples_leaf}};
    jc["dist"] = {{"max_depth", cfg.dist.max_depth},
                  {"learning_rate", cfg.dist.learning_rate},
                  {"max_iters", cfg.dist.max_iters},
                  {"patience", cfg.dist.patience},
                  {"min_samples_leaf", cfg.dist.min_samples_leaf}};
    jc["val_weeks"] = cfg.val_weeks;
    jc["test_weeks"] = cfg.test_weeks;
    jc["explain_cap"] = cfg.explain_cap;
    jc["tz_offset_seconds"] = cfg.tz_offset_seconds;
    return jc;
}

} // namespace

RunResult run_pipeline(const PipelineConfig& cfg) {
    if (cfg.input_csv.has_value() == cfg.synth.has_value())
        throw ConfigError("exactly one of input_csv and synth must be set");
    if (cfg.out_dir.empty()) throw ConfigError("out_dir is required");
    if (cfg.explain_cap == 0) throw ConfigError("explain_cap must be at least 1");

    const bool want_point = cfg.models != ModelSelection::Dist;
    const bool want_dist = cfg.models != ModelSelection::Point;

    std::size_t dropped = 0;
    Dataset full = with_stage("ingest", [&] {
        if (cfg.input_csv) {
            auto r = ingest_csv_file(*cfg.input_csv, nullptr, cfg.tz_offset_seconds);
            dropped = r.rows_dropped_missing_target;
            Dataset d = std::move(r.data);
            if (cfg.tech_filter) d = filter_tech(d, *cfg.tech_filter);
            return d;
        }
        auto syn = generate(*cfg.synth);
        if (cfg.tz_offset_seconds != 0)
            return build_dataset(syn.records, nullptr, cfg.tz_offset_seconds);
        return std::move(syn.data);
    });
    const std::string tech_str = cfg.synth          ? std::string(tech_label(cfg.synth->tech))
                                 : cfg.tech_filter  ? std::string(tech_label(*cfg.tech_filter))
                                                    : std::string("all");

    SplitResult parts = with_stage("split", [&] {
        SplitResult s = temporal_split(full, cfg.val_weeks, cfg.test_weeks);
        if (s.train.n_rows() < 2 || s.val.n_rows() < 1 || s.test.n_rows() < 2)
            throw ConfigError("temporal split left too few rows (train=" +
                              std::to_string(s.train.n_rows()) + ", val=" +
                              std::to_string(s.val.n_rows()) + ", test=" +
                              std::to_string(s.test.n_rows()) + ")");
        return s;
    });

    const TargetTransform t = with_stage("transform", [&] {
        TargetTransform tt = fit_transform(parts.train.target_kbps);
        standardize(parts.train, tt);
        standardize(parts.val, tt);
        standardize(parts.test, tt);
        return tt;
    });

    std::optional<PointBooster> pb;
    if (want_point)
        pb = with_stage("train-point",
                        [&] { return fit_point_booster(parts.train, parts.val, cfg.point, cfg.exec); });
    std::optional<DistBooster> db;
    if (want_dist)
        db = with_stage("train-dist",
                        [&] { return fit_dist_booster(parts.train, parts.val, cfg.dist, cfg.exec); });

    std::vector<EvalRow> rows;
    CalibrationCurve curve;
    with_stage("evaluate", [&] {
        if (pb) {
            auto pred = predict_point(*pb, parts.test.features, cfg.exec);
            EvalRow r;
            r.model = "point";
            r.pm = point_metrics(parts.test.target, pred, t);
            r.crps_std = crps_mean(pred, parts.test.target);
            r.best_iteration = pb->best_iteration;
            rows.push_back(std::move(r));
        }
        if (db) {
            auto params = predict_dist(*db, parts.test.features, cfg.exec);
            std::vector<double> mu(params.size());
            for (std::size_t i = 0; i < params.size(); ++i) mu[i] = params[i].mu;
            EvalRow r;
            r.model = "dist";
            r.pm = point_metrics(parts.test.target, mu, t);
            r.crps_std = crps_mean(params, parts.test.target);
            curve = calibration_curve(params, parts.test.target);
            r.cauc = c_auc(curve);
            r.cov95 = interval_coverage(params, parts.test.target, 0.95);
            r.best_iteration = db->best_iteration;
            rows.push_back(std::move(r));
        }
    });

    std::optional<ImportanceReport> imp_mu, imp_sigma;
    std::size_t explained = 0;
    if (db) {
        with_stage("explain", [&] {
            auto idx = stride_sample(parts.test.n_rows(), cfg.explain_cap);
            explained = idx.size();
            Dataset ex = subset(parts.test, idx);
            imp_mu = importance_report(*db, DistHead::Mu, ex, cfg.exec);
            imp_sigma = importance_report(*db, DistHead::LogSigma, ex, cfg.exec);
            rows.back().ratio_mu = imp_mu->e2e_radio_ratio;
            rows.back().ratio_sigma = imp_sigma->e2e_radio_ratio;
        });
    }

    // Everything below must be byte-reproducible for a given config.
    json root;
    root["format_version"] = 1;
    root["tech"] = tech_str;
    root["config"] = config_echo(cfg);
    root["transform"] = {{"mu_train", t.mu_train}, {"sigma_train", t.sigma_train}};
    root["rows"] = {{"train", parts.train.n_rows()},
                    {"val", parts.val.n_rows()},
                    {"test", parts.test.n_rows()},
                    {"dropped_missing_target", dropped},
                    {"explained", db ? json(explained) : json()}};
    json jresults = json::array();
    for (const auto& r : rows) {
        json jr;
        jr["model"] = r.model;
        jr["best_iteration"] = r.best_iteration;
        jr["mae_std"] = jnum(r.pm.mae_std);
        jr["rmse_std"] = jnum(r.pm.rmse_std);
        jr["mae_kbps"] = jnum(r.pm.mae_kbps);
        jr["rmse_kbps"] = jnum(r.pm.rmse_kbps);
        jr["r2"] = r.pm.r2 ? jnum(*r.pm.r2) : json();
        jr["crps_std"] = jnum(r.crps_std);
        jr["c_auc"] = r.cauc ? jnum(*r.cauc) : json();
        jr["coverage95"] = r.cov95 ? jnum(*r.cov95) : json();
        jr["e2e_radio_ratio_mu"] = r.ratio_mu ? jnum(*r.ratio_mu) : json();
        jr["e2e_radio_ratio_sigma"] = r.ratio_sigma ? jnum(*r.ratio_sigma) : json();
        jresults.push_back(jr);
    }
    root["results"] = jresults;
    root["artifacts"] = {{"metrics", "metrics.json"},
                         {"calibration", db ? json("calibration.csv") : json()},
                         {"importance_mu", db ? json("importance_mu.csv") : json()},
                         {"importance_sigma", db ? json("importance_sigma.csv") : json()},
                         {"point_model", pb ? json("models/point.model.json") : json()},
                         {"dist_model", db ? json("models/dist.model.json") : json()}};

    RunResult result;
    result.metrics_json = root.dump(2) + "\n";

    with_stage("write", [&] {
        fs::path out(cfg.out_dir);
        std::error_code ec;
        fs::create_directories(out / "models", ec);
        if (ec) throw IoError("cannot create output directory '" + (out / "models").string() + "'");

        ArtifactGuard guard;
        auto emit = [&](const char* rel, const std::string& bytes) {
            fs::path p = out / rel;
            write_file(p, bytes);
            guard.files.push_back(p);
            result.artifacts.push_back(rel);
        };

        emit("metrics.json", result.metrics_json);
        if (db) {
            emit("calibration.csv", calibration_csv(curve));
            std::ostringstream mu_csv, sigma_csv;
            write_importance_csv(mu_csv, *imp_mu);
            write_importance_csv(sigma_csv, *imp_sigma);
            emit("importance_mu.csv", mu_csv.str());
            emit("importance_sigma.csv", sigma_csv.str());
        }
        ModelMeta meta{full.encoders, t, cfg.tz_offset_seconds};
        if (pb) emit("models/point.model.json", to_json_string(PointModel{*pb, cfg.point, meta}));
        if (db) emit("models/dist.model.json", to_json_string(DistModel{*db, cfg.dist, meta}));
        guard.committed = true;
    });

    std::string s;
    s += "tech=" + tech_str + "  rows: train=" + std::to_string(parts.train.n_rows()) +
         " val=" + std::to_string(parts.val.n_rows()) +
         " test=" + std::to_string(parts.test.n_rows()) +
         " dropped=" + std::to_string(dropped) + "\n\n";
    s += "model  best_it   mae_std  rmse_std       r2    mae_kbps   rmse_kbps  crps_std    c_auc  cov95\n";
    for (const auto& r : rows) {
        char head[32];
        std::snprintf(head, sizeof head, "%-5s %8d", r.model.c_str(), r.best_iteration);
        s += head;
        s += num_cell(r.pm.mae_std, 10, 4);
        s += num_cell(r.pm.rmse_std, 10, 4);
        s += r.pm.r2 ? num_cell(*r.pm.r2, 9, 4) : dash_cell(9);
        s += num_cell(r.pm.mae_kbps, 12, 1);
        s += num_cell(r.pm.rmse_kbps, 12, 1);
        s += num_cell(r.crps_std, 10, 4);
        s += r.cauc ? num_cell(*r.cauc, 9, 4) : dash_cell(9);
        s += r.cov95 ? num_cell(*r.cov95, 7, 3) : dash_cell(7);
        s += '\n';
    }
    if (db && imp_mu) {
        char line[160];
        std::snprintf(line, sizeof line,
                      "\nimportance e2e/radio ratio: mu=%.3f sigma=%.3f (%zu rows explained)\n",
                      imp_mu->e2e_radio_ratio, imp_sigma->e2e_radio_ratio, explained);
        s += line;
    }
    result.summary = std::move(s);
    return result;
}

} // namespace dlcast
