#include "dlcast/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dlcast/errors.hpp"

namespace dlcast {

namespace {

using nlohmann::json;

json tree_to_json(const RegressionTree& tree) {
    json nodes = json::array();
    for (const TreeNode& nd : tree.nodes) {
        nodes.push_back({{"feature", nd.feature},
                         {"threshold", nd.threshold},
                         {"default_left", nd.default_left},
                         {"left", nd.left},
                         {"right", nd.right},
                         {"value", nd.value},
                         {"cover", nd.cover}});
    }
    return {{"max_depth", tree.max_depth}, {"nodes", nodes}};
}

json encoder_to_json(const Encoder& e) {
    return json(e.labels);
}

json meta_to_json(const ModelMeta& meta) {
    return {{"encoders",
             {{"tech", encoder_to_json(meta.encoders.tech)},
              {"carrier", encoder_to_json(meta.encoders.carrier)},
              {"band", encoder_to_json(meta.encoders.band)},
              {"dow", encoder_to_json(meta.encoders.dow)}}},
            {"transform",
             {{"mu_train", meta.transform.mu_train}, {"sigma_train", meta.transform.sigma_train}}},
            {"tz_offset_seconds", meta.tz_offset_seconds}};
}

// --- loading helpers: every access names the offending field on failure ---

[[noreturn]] void bad_field(const std::string& field) {
    throw DataError("model file: missing or invalid field '" + field + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) bad_field(path);
    return obj.at(key);
}

double get_number(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number()) bad_field(path);
    return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_number_integer()) bad_field(path);
    return v.get<int>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path) {
    const json& v = require(obj, key, path);
    if (!v.is_boolean()) bad_field(path);
    return v.get<bool>();
}

RegressionTree tree_from_json(const json& jt, const std::string& path) {
    RegressionTree tree;
    tree.max_depth = get_int(jt, "max_depth", path + ".max_depth");
    const json& nodes = require(jt, "nodes", path + ".nodes");
    if (!nodes.is_array() || nodes.empty()) bad_field(path + ".nodes");
    const auto n = static_cast<int>(nodes.size());
    for (int k = 0; k < n; ++k) {
        const json& jn = nodes[static_cast<std::size_t>(k)];
        const std::string npath = path + ".nodes[" + std::to_string(k) + "]";
        TreeNode nd;
        nd.feature = get_int(jn, "feature", npath + ".feature");
        nd.threshold = get_number(jn, "threshold", npath + ".threshold");
        nd.default_left = get_bool(jn, "default_left", npath + ".default_left");
        nd.left = get_int(jn, "left", npath + ".left");
        nd.right = get_int(jn, "right", npath + ".right");
        nd.value = get_number(jn, "value", npath + ".value");
        nd.cover = get_number(jn, "cover", npath + ".cover");
        if (!(nd.cover > 0.0)) bad_field(npath + ".cover");
        if (nd.feature < 0) {
            if (nd.left != -1 || nd.right != -1) bad_field(npath + ".left");
        } else {
            if (nd.left <= k || nd.left >= n) bad_field(npath + ".left");
            if (nd.right <= k || nd.right >= n) bad_field(npath + ".right");
        }
        tree.nodes.push_back(nd);
    }
    return tree;
}

Encoder encoder_from_json(const json& je, const std::string& path) {
    if (!je.is_array()) bad_field(path);
    Encoder enc;
    for (std::size_t i = 0; i < je.size(); ++i) {
        const json& v = je[i];
        if (!v.is_string()) bad_field(path + "[" + std::to_string(i) + "]");
        enc.labels.push_back(v.get<std::string>());
    }
    return enc;
}

ModelMeta meta_from_json(const json& root) {
    ModelMeta meta;
    const json& je = require(root, "encoders", "encoders");
    meta.encoders.tech = encoder_from_json(require(je, "tech", "encoders.tech"), "encoders.tech");
    meta.encoders.carrier =
        encoder_from_json(require(je, "carrier", "encoders.carrier"), "encoders.carrier");
    meta.encoders.band = encoder_from_json(require(je, "band", "encoders.band"), "encoders.band");
    meta.encoders.dow = encoder_from_json(require(je, "dow", "encoders.dow"), "encoders.dow");
    const json& jt = require(root, "transform", "transform");
    meta.transform.mu_train = get_number(jt, "mu_train", "transform.mu_train");
    meta.transform.sigma_train = get_number(jt, "sigma_train", "transform.sigma_train");
    if (!(meta.transform.sigma_train > 0.0)) bad_field("transform.sigma_train");
    const json& tz = require(root, "tz_offset_seconds", "tz_offset_seconds");
    if (!tz.is_number_integer()) bad_field("tz_offset_seconds");
    meta.tz_offset_seconds = tz.get<std::int64_t>();
    return meta;
}

std::vector<RegressionTree> trees_from_json(const json& jarr, const std::string& path) {
    if (!jarr.is_array()) bad_field(path);
    std::vector<RegressionTree> trees;
    for (std::size_t t = 0; t < jarr.size(); ++t) {
        trees.push_back(tree_from_json(jarr[t], path + "[" + std::to_string(t) + "]"));
    }
    return trees;
}

} // namespace

std::string to_json_string(const PointModel& m) {
    json trees = json::array();
    for (const RegressionTree& t : m.booster.trees) trees.push_back(tree_to_json(t));
    json root = meta_to_json(m.meta);
    root["format_version"] = 1;
    root["model_type"] = "point";
    root["config"] = {{"max_depth", m.config.max_depth},
                      {"learning_rate", m.config.learning_rate},
                      {"max_iters", m.config.max_iters},
                      {"patience", m.config.patience},
                      {"min_samples_leaf", m.config.min_samples_leaf},
                      {"n_features", m.booster.n_features}};
    root["booster"] = {{"model_type", "point"},
                       {"base_score", m.booster.base_score},
                       {"learning_rate", m.booster.learning_rate},
                       {"best_iteration", m.booster.best_iteration},
                       {"trees", std::move(trees)}};
    return root.dump(2) + "\n";
}

std::string to_json_string(const DistModel& m) {
    json mu_trees = json::array();
    for (const RegressionTree& t : m.booster.mu_trees) mu_trees.push_back(tree_to_json(t));
    json ls_trees = json::array();
    for (const RegressionTree& t : m.booster.logsigma_trees) ls_trees.push_back(tree_to_json(t));
    json root = meta_to_json(m.meta);
    root["format_version"] = 1;
    root["model_type"] = "dist";
    root["config"] = {{"max_depth", m.config.max_depth},
                      {"learning_rate", m.config.learning_rate},
                      {"max_iters", m.config.max_iters},
                      {"patience", m.config.patience},
                      {"min_samples_leaf", m.config.min_samples_leaf},
                      {"n_features", m.booster.n_features}};
    root["booster"] = {{"model_type", "dist"},
                       {"init", {{"mu", m.booster.init.mu}, {"log_sigma", m.booster.init.log_sigma}}},
                       {"learning_rate", m.booster.learning_rate},
                       {"scalings", m.booster.scalings},
                       {"best_iteration", m.booster.best_iteration},
                       {"mu_trees", std::move(mu_trees)},
                       {"logsigma_trees", std::move(ls_trees)}};
    return root.dump(2) + "\n";
}

AnyModel model_from_json_string(const std::string& text) {
    json root = json::parse(text, nullptr, false);
    if (root.is_discarded()) throw DataError("model file: not valid JSON");

    const int version = get_int(root, "format_version", "format_version");
    if (version != 1) {
        throw DataError("model file: unsupported format_version " + std::to_string(version));
    }
    const json& jtype = require(root, "model_type", "model_type");
    if (!jtype.is_string()) bad_field("model_type");
    const std::string type = jtype.get<std::string>();

    ModelMeta meta = meta_from_json(root);
    const json& jc = require(root, "config", "config");
    const json& jb = require(root, "booster", "booster");
    const int n_features = get_int(jc, "n_features", "config.n_features");
    if (n_features < 1) bad_field("config.n_features");

    if (type == "point") {
        PointModel m;
        m.meta = std::move(meta);
        m.config.max_depth = get_int(jc, "max_depth", "config.max_depth");
        m.config.learning_rate = get_number(jc, "learning_rate", "config.learning_rate");
        m.config.max_iters = get_int(jc, "max_iters", "config.max_iters");
        m.config.patience = get_int(jc, "patience", "config.patience");
        m.config.min_samples_leaf = get_int(jc, "min_samples_leaf", "config.min_samples_leaf");
        m.booster.n_features = n_features;
        m.booster.base_score = get_number(jb, "base_score", "booster.base_score");
        m.booster.learning_rate = get_number(jb, "learning_rate", "booster.learning_rate");
        m.booster.best_iteration = get_int(jb, "best_iteration", "booster.best_iteration");
        m.booster.trees = trees_from_json(require(jb, "trees", "booster.trees"), "booster.trees");
        if (m.booster.best_iteration < 0 ||
            m.booster.best_iteration > static_cast<int>(m.booster.trees.size())) {
            bad_field("booster.best_iteration");
        }
        return m;
    }
    if (type == "dist") {
        DistModel m;
        m.meta = std::move(meta);
        m.config.max_depth = get_int(jc, "max_depth", "config.max_depth");
        m.config.learning_rate = get_number(jc, "learning_rate", "config.learning_rate");
        m.config.max_iters = get_int(jc, "max_iters", "config.max_iters");
        m.config.patience = get_int(jc, "patience", "config.patience");
        m.config.min_samples_leaf = get_int(jc, "min_samples_leaf", "config.min_samples_leaf");
        m.booster.n_features = n_features;
        const json& ji = require(jb, "init", "booster.init");
        m.booster.init.mu = get_number(ji, "mu", "booster.init.mu");
        m.booster.init.log_sigma = get_number(ji, "log_sigma", "booster.init.log_sigma");
        m.booster.learning_rate = get_number(jb, "learning_rate", "booster.learning_rate");
        const json& js = require(jb, "scalings", "booster.scalings");
        if (!js.is_array()) bad_field("booster.scalings");
        for (std::size_t k = 0; k < js.size(); ++k) {
            if (!js[k].is_number()) bad_field("booster.scalings[" + std::to_string(k) + "]");
            m.booster.scalings.push_back(js[k].get<double>());
        }
        m.booster.best_iteration = get_int(jb, "best_iteration", "booster.best_iteration");
        m.booster.mu_trees =
            trees_from_json(require(jb, "mu_trees", "booster.mu_trees"), "booster.mu_trees");
        m.booster.logsigma_trees = trees_from_json(
            require(jb, "logsigma_trees", "booster.logsigma_trees"), "booster.logsigma_trees");
        if (m.booster.mu_trees.size() != m.booster.logsigma_trees.size() ||
            m.booster.mu_trees.size() != m.booster.scalings.size()) {
            bad_field("booster.scalings");
        }
        if (m.booster.best_iteration < 0 ||
            m.booster.best_iteration > static_cast<int>(m.booster.mu_trees.size())) {
            bad_field("booster.best_iteration");
        }
        return m;
    }
    throw DataError("model file: unknown model_type '" + type + "'");
}

void save_model(const PointModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_json_string(m);
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

void save_model(const DistModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << to_json_string(m);
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

AnyModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json_string(ss.str());
}

} // namespace dlcast
