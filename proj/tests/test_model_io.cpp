#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "dlcast/errors.hpp"
#include "dlcast/model_io.hpp"
#include "dlcast/rng.hpp"
#include "reference.hpp"

using namespace dlcast;
using nlohmann::json;

namespace {

Dataset small_ds(std::uint64_t seed) {
    SplitMix64 rng(seed);
    const std::size_t rows = 40, cols = 3;
    Dataset ds;
    ds.features = FeatureMatrix(rows, cols);
    for (std::size_t c = 0; c < cols; ++c) {
        for (std::size_t r = 0; r < rows; ++r) {
            if (rng.next_uniform() < 0.2) {
                ds.features.set_missing(r, c);
            } else {
                ds.features.set(r, c, static_cast<double>(rng.next_below(16)) / 8.0);
            }
        }
    }
    ds.target.resize(rows);
    for (auto& v : ds.target) v = static_cast<double>(rng.next_below(64)) / 16.0;
    return ds;
}

ModelMeta sample_meta() {
    ModelMeta meta;
    meta.encoders.tech.labels = {"NR_SA", "LTE"};
    meta.encoders.carrier.labels = {"OpA", "OpB"};
    meta.encoders.band.labels = {"n78"};
    meta.encoders.dow.labels = {"Mon", "Tue", "Sun"};
    meta.transform = {2.5, 1.25};
    meta.tz_offset_seconds = 3600;
    return meta;
}

PointModel sample_point() {
    const Dataset ds = small_ds(500);
    PointModel m;
    m.config.max_depth = 3;
    m.config.max_iters = 8;
    m.config.patience = 100;
    m.booster = fit_point_booster(ds, ds, m.config);
    m.meta = sample_meta();
    return m;
}

DistModel sample_dist() {
    const Dataset ds = small_ds(501);
    DistModel m;
    m.config.max_depth = 2;
    m.config.max_iters = 6;
    m.config.patience = 100;
    m.booster = fit_dist_booster(ds, ds, m.config);
    m.meta = sample_meta();
    return m;
}

void check_meta_equal(const ModelMeta& a, const ModelMeta& b) {
    CHECK(a.encoders.tech.labels == b.encoders.tech.labels);
    CHECK(a.encoders.carrier.labels == b.encoders.carrier.labels);
    CHECK(a.encoders.band.labels == b.encoders.band.labels);
    CHECK(a.encoders.dow.labels == b.encoders.dow.labels);
    CHECK(a.transform.mu_train == b.transform.mu_train);
    CHECK(a.transform.sigma_train == b.transform.sigma_train);
    CHECK(a.tz_offset_seconds == b.tz_offset_seconds);
}

} // namespace

TEST_CASE("point models round trip through JSON") {
    const PointModel m = sample_point();
    const std::string text = to_json_string(m);
    CHECK(text.back() == '\n');
    CHECK(to_json_string(m) == text); // serialization is deterministic

    const AnyModel any = model_from_json_string(text);
    REQUIRE(std::holds_alternative<PointModel>(any));
    const PointModel& r = std::get<PointModel>(any);

    CHECK(r.booster.base_score == m.booster.base_score);
    CHECK(r.booster.learning_rate == m.booster.learning_rate);
    CHECK(r.booster.best_iteration == m.booster.best_iteration);
    CHECK(r.booster.n_features == m.booster.n_features);
    REQUIRE(r.booster.trees.size() == m.booster.trees.size());
    for (std::size_t t = 0; t < m.booster.trees.size(); ++t) {
        CHECK(reference::tree_signature(r.booster.trees[t]) ==
              reference::tree_signature(m.booster.trees[t]));
    }
    CHECK(r.config.max_depth == m.config.max_depth);
    CHECK(r.config.learning_rate == m.config.learning_rate);
    CHECK(r.config.max_iters == m.config.max_iters);
    CHECK(r.config.patience == m.config.patience);
    CHECK(r.config.min_samples_leaf == m.config.min_samples_leaf);
    check_meta_equal(r.meta, m.meta);

    const Dataset probe = small_ds(502);
    CHECK(predict_point(r.booster, probe.features) == predict_point(m.booster, probe.features));
    CHECK(to_json_string(r) == text); // reload then re-serialize is byte-stable
}

TEST_CASE("dist models round trip through JSON") {
    const DistModel m = sample_dist();
    const std::string text = to_json_string(m);
    const AnyModel any = model_from_json_string(text);
    REQUIRE(std::holds_alternative<DistModel>(any));
    const DistModel& r = std::get<DistModel>(any);

    CHECK(r.booster.init.mu == m.booster.init.mu);
    CHECK(r.booster.init.log_sigma == m.booster.init.log_sigma);
    CHECK(r.booster.scalings == m.booster.scalings);
    CHECK(r.booster.best_iteration == m.booster.best_iteration);
    REQUIRE(r.booster.mu_trees.size() == m.booster.mu_trees.size());
    for (std::size_t t = 0; t < m.booster.mu_trees.size(); ++t) {
        CHECK(reference::tree_signature(r.booster.mu_trees[t]) ==
              reference::tree_signature(m.booster.mu_trees[t]));
        CHECK(reference::tree_signature(r.booster.logsigma_trees[t]) ==
              reference::tree_signature(m.booster.logsigma_trees[t]));
    }
    check_meta_equal(r.meta, m.meta);

    const Dataset probe = small_ds(503);
    const auto pa = predict_dist(r.booster, probe.features);
    const auto pb = predict_dist(m.booster, probe.features);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        CHECK(pa[i].mu == pb[i].mu);
        CHECK(pa[i].log_sigma == pb[i].log_sigma);
    }
    CHECK(to_json_string(r) == text);
}

TEST_CASE("models round trip through files") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "dlcast_model_io_test";
    fs::create_directories(dir);

    const PointModel m = sample_point();
    const std::string path = (dir / "point.model.json").string();
    save_model(m, path);
    const std::string path2 = (dir / "point2.model.json").string();
    save_model(m, path2);

    std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    CHECK(sa.str() == to_json_string(m));

    const AnyModel any = load_model(path);
    REQUIRE(std::holds_alternative<PointModel>(any));
    const Dataset probe = small_ds(504);
    CHECK(predict_point(std::get<PointModel>(any).booster, probe.features) ==
          predict_point(m.booster, probe.features));

    fs::remove_all(dir);
    CHECK_THROWS_AS(load_model(path), IoError);
    CHECK_THROWS_AS(save_model(m, (dir / "missing" / "x.json").string()), IoError);
}

TEST_CASE("corrupted model files are rejected with the offending field") {
    const std::string point_text = to_json_string(sample_point());
    const std::string dist_text = to_json_string(sample_dist());

    auto mutate = [](const std::string& text, auto&& fn) {
        json root = json::parse(text);
        fn(root);
        return root.dump();
    };

    CHECK_THROWS_WITH_AS(model_from_json_string("{nope"), "model file: not valid JSON",
                         DataError);
    CHECK_THROWS_WITH_AS(
        model_from_json_string(mutate(point_text, [](json& r) { r["format_version"] = 2; })),
        "model file: unsupported format_version 2", DataError);
    CHECK_THROWS_AS(
        model_from_json_string(mutate(point_text, [](json& r) { r.erase("format_version"); })),
        DataError);
    CHECK_THROWS_WITH_AS(
        model_from_json_string(mutate(point_text, [](json& r) { r["model_type"] = "banana"; })),
        "model file: unknown model_type 'banana'", DataError);

    CHECK_THROWS_AS(model_from_json_string(mutate(
                        point_text, [](json& r) { r["booster"]["best_iteration"] = 99; })),
                    DataError);
    CHECK_THROWS_AS(model_from_json_string(mutate(
                        point_text, [](json& r) { r["booster"]["best_iteration"] = -1; })),
                    DataError);
    CHECK_THROWS_AS(model_from_json_string(mutate(point_text,
                                                  [](json& r) {
                                                      json& nd = r["booster"]["trees"][0]["nodes"][0];
                                                      nd["cover"] = 0.0;
                                                  })),
                    DataError);
    CHECK_THROWS_AS(model_from_json_string(mutate(point_text,
                                                  [](json& r) {
                                                      json& nd = r["booster"]["trees"][0]["nodes"][0];
                                                      if (nd["feature"].get<int>() >= 0) {
                                                          nd["left"] = 0; // self reference
                                                      } else {
                                                          nd["left"] = 1; // leaf with a child
                                                      }
                                                  })),
                    DataError);
    CHECK_THROWS_AS(
        model_from_json_string(mutate(point_text, [](json& r) { r["booster"].erase("trees"); })),
        DataError);
    CHECK_THROWS_AS(model_from_json_string(mutate(
                        point_text, [](json& r) { r["transform"]["sigma_train"] = 0.0; })),
                    DataError);
    CHECK_THROWS_AS(
        model_from_json_string(mutate(point_text, [](json& r) { r["config"]["n_features"] = 0; })),
        DataError);

    CHECK_THROWS_AS(model_from_json_string(mutate(dist_text,
                                                  [](json& r) {
                                                      json& s = r["booster"]["scalings"];
                                                      s.erase(s.size() - 1);
                                                  })),
                    DataError);
    CHECK_THROWS_AS(model_from_json_string(mutate(
                        dist_text, [](json& r) { r["booster"]["init"].erase("log_sigma"); })),
                    DataError);
}
