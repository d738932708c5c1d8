#include "dlcast/treeshap.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dlcast/errors.hpp"
#include "dlcast/text.hpp"

namespace dlcast {

namespace {

// Unique-path element of the Lundberg-Lee TreeSHAP algorithm. pweight of the
// i-th element is the permutation weight of paths with i-1 "one" entries.
struct PathElement {
    int feature_index = -1;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

void extend_path(PathElement* unique_path, unsigned unique_depth, double zero_fraction,
                 double one_fraction, int feature_index) {
    unique_path[unique_depth].feature_index = feature_index;
    unique_path[unique_depth].zero_fraction = zero_fraction;
    unique_path[unique_depth].one_fraction = one_fraction;
    unique_path[unique_depth].pweight = unique_depth == 0 ? 1.0 : 0.0;
    for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
        unique_path[i + 1].pweight +=
            one_fraction * unique_path[i].pweight * (i + 1) / static_cast<double>(unique_depth + 1);
        unique_path[i].pweight = zero_fraction * unique_path[i].pweight *
                                 (unique_depth - static_cast<unsigned>(i)) /
                                 static_cast<double>(unique_depth + 1);
    }
}

void unwind_path(PathElement* unique_path, unsigned unique_depth, unsigned path_index) {
    const double one_fraction = unique_path[path_index].one_fraction;
    const double zero_fraction = unique_path[path_index].zero_fraction;
    double next_one_portion = unique_path[unique_depth].pweight;

    for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = unique_path[i].pweight;
            unique_path[i].pweight = next_one_portion * (unique_depth + 1) /
                                     static_cast<double>((i + 1) * one_fraction);
            next_one_portion = tmp - unique_path[i].pweight * zero_fraction *
                                         (unique_depth - static_cast<unsigned>(i)) /
                                         static_cast<double>(unique_depth + 1);
        } else {
            unique_path[i].pweight =
                (unique_path[i].pweight * (unique_depth + 1)) /
                (zero_fraction * (unique_depth - static_cast<unsigned>(i)));
        }
    }

    for (unsigned i = path_index; i < unique_depth; ++i) {
        unique_path[i].feature_index = unique_path[i + 1].feature_index;
        unique_path[i].zero_fraction = unique_path[i + 1].zero_fraction;
        unique_path[i].one_fraction = unique_path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* unique_path, unsigned unique_depth,
                        unsigned path_index) {
    const double one_fraction = unique_path[path_index].one_fraction;
    const double zero_fraction = unique_path[path_index].zero_fraction;
    double next_one_portion = unique_path[unique_depth].pweight;
    double total = 0.0;
    for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = next_one_portion * (unique_depth + 1) /
                               static_cast<double>((i + 1) * one_fraction);
            total += tmp;
            next_one_portion =
                unique_path[i].pweight -
                tmp * zero_fraction *
                    ((unique_depth - static_cast<unsigned>(i)) /
                     static_cast<double>(unique_depth + 1));
        } else if (zero_fraction != 0.0) {
            total += (unique_path[i].pweight / zero_fraction) /
                     ((unique_depth - static_cast<unsigned>(i)) /
                      static_cast<double>(unique_depth + 1));
        }
    }
    return total;
}

int node_depth(const RegressionTree& tree, int node) {
    const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
    if (nd.is_leaf()) return 0;
    return 1 + std::max(node_depth(tree, nd.left), node_depth(tree, nd.right));
}

// Recursive walk accumulating scale * (per-feature contributions) into phi.
void tree_shap_rec(const RegressionTree& tree, const FeatureMatrix& X, std::size_t row,
                   double scale, double* phi, int node_index, unsigned unique_depth,
                   PathElement* parent_unique_path, double parent_zero_fraction,
                   double parent_one_fraction, int parent_feature_index) {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];

    PathElement* unique_path = parent_unique_path + unique_depth + 1;
    std::copy(parent_unique_path, parent_unique_path + unique_depth + 1, unique_path);
    extend_path(unique_path, unique_depth, parent_zero_fraction, parent_one_fraction,
                parent_feature_index);

    if (node.is_leaf()) {
        for (unsigned i = 1; i <= unique_depth; ++i) {
            const double w = unwound_path_sum(unique_path, unique_depth, i);
            const PathElement& el = unique_path[i];
            phi[el.feature_index] +=
                w * (el.one_fraction - el.zero_fraction) * node.value * scale;
        }
        return;
    }

    const auto split_index = static_cast<std::size_t>(node.feature);
    if (split_index >= X.n_cols()) {
        throw DataError("tree_shap: row width does not match the fitted tree");
    }
    const bool go_left =
        X.is_missing(row, split_index) ? node.default_left : X.at(row, split_index) < node.threshold;
    const int hot_index = go_left ? node.left : node.right;
    const int cold_index = go_left ? node.right : node.left;
    const double w = node.cover;
    if (!(w > 0.0)) throw DataError("tree_shap: zero cover at an internal node");
    const double hot_zero_fraction = tree.nodes[static_cast<std::size_t>(hot_index)].cover / w;
    const double cold_zero_fraction = tree.nodes[static_cast<std::size_t>(cold_index)].cover / w;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // If this feature already appears on the path, undo that entry so the
    // split can be redone at this node.
    unsigned path_index = 0;
    for (; path_index <= unique_depth; ++path_index) {
        if (unique_path[path_index].feature_index == node.feature) break;
    }
    if (path_index != unique_depth + 1) {
        incoming_zero_fraction = unique_path[path_index].zero_fraction;
        incoming_one_fraction = unique_path[path_index].one_fraction;
        unwind_path(unique_path, unique_depth, path_index);
        unique_depth -= 1;
    }

    tree_shap_rec(tree, X, row, scale, phi, hot_index, unique_depth + 1, unique_path,
                  hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction, node.feature);
    tree_shap_rec(tree, X, row, scale, phi, cold_index, unique_depth + 1, unique_path,
                  cold_zero_fraction * incoming_zero_fraction, 0.0, node.feature);
}

// Cover-weighted mean of leaf values: the background expectation of the tree.
double tree_mean_value(const RegressionTree& tree) {
    if (!(tree.nodes[0].cover > 0.0)) throw DataError("tree_shap: zero cover at the root");
    double acc = 0.0;
    for (const TreeNode& nd : tree.nodes) {
        if (nd.is_leaf()) acc += nd.value * nd.cover;
    }
    return acc / tree.nodes[0].cover;
}

void tree_shap_into(const RegressionTree& tree, const FeatureMatrix& X, std::size_t row,
                    double scale, double* phi, std::vector<PathElement>& path_buf) {
    if (tree.nodes.size() == 1) return; // single leaf: no feature influences the output
    const unsigned maxd = static_cast<unsigned>(node_depth(tree, 0)) + 2;
    path_buf.assign((maxd * (maxd + 1)) / 2, PathElement{});
    tree_shap_rec(tree, X, row, scale, phi, 0, 0, path_buf.data(), 1.0, 1.0, -1);
}

struct HeadView {
    const std::vector<RegressionTree>* trees = nullptr;
    std::vector<double> scales; // per-tree multiplier including sign
    double base0 = 0.0;         // init / base_score
    int count = 0;              // trees in use (best_iteration)
};

HeadView head_view(const PointBooster& b) {
    HeadView h;
    h.trees = &b.trees;
    h.count = b.best_iteration;
    h.base0 = b.base_score;
    h.scales.assign(static_cast<std::size_t>(h.count), b.learning_rate);
    return h;
}

HeadView head_view(const DistBooster& b, DistHead head) {
    HeadView h;
    h.trees = head == DistHead::Mu ? &b.mu_trees : &b.logsigma_trees;
    h.count = b.best_iteration;
    h.base0 = head == DistHead::Mu ? b.init.mu : b.init.log_sigma;
    h.scales.resize(static_cast<std::size_t>(h.count));
    for (int t = 0; t < h.count; ++t) {
        h.scales[static_cast<std::size_t>(t)] =
            -b.learning_rate * b.scalings[static_cast<std::size_t>(t)];
    }
    return h;
}

double head_base(const HeadView& h) {
    double base = h.base0;
    for (int t = 0; t < h.count; ++t) {
        base += h.scales[static_cast<std::size_t>(t)] *
                tree_mean_value((*h.trees)[static_cast<std::size_t>(t)]);
    }
    return base;
}

void head_phi(const HeadView& h, const FeatureMatrix& X, std::size_t row, double* phi,
              std::vector<PathElement>& path_buf) {
    for (int t = 0; t < h.count; ++t) {
        tree_shap_into((*h.trees)[static_cast<std::size_t>(t)], X, row,
                       h.scales[static_cast<std::size_t>(t)], phi, path_buf);
    }
}

ImportanceReport report_for(const HeadView& h, const Dataset& explain_set, Exec exec) {
    const std::size_t n = explain_set.n_rows();
    if (n == 0) throw DataError("importance_report: empty explanation set");
    const std::size_t nf = explain_set.features.n_cols();

    std::vector<double> abs_phi(n * nf);
    parallel_for(n, exec, [&](std::size_t i) {
        std::vector<PathElement> path_buf;
        std::vector<double> phi(nf, 0.0);
        head_phi(h, explain_set.features, i, phi.data(), path_buf);
        for (std::size_t f = 0; f < nf; ++f) abs_phi[i * nf + f] = std::abs(phi[f]);
    });

    ImportanceReport rep;
    rep.feature = explain_set.feature_names;
    rep.category = explain_set.feature_category;
    rep.mean_abs.assign(nf, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t f = 0; f < nf; ++f) rep.mean_abs[f] += abs_phi[i * nf + f];
    }
    for (std::size_t f = 0; f < nf; ++f) rep.mean_abs[f] /= static_cast<double>(n);

    double mx = 0.0;
    for (double v : rep.mean_abs) mx = std::max(mx, v);
    rep.normalized.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        rep.normalized[f] = mx > 0.0 ? rep.mean_abs[f] / mx : 0.0;
    }
    for (std::size_t f = 0; f < nf; ++f) {
        rep.category_sums[static_cast<std::size_t>(rep.category[f])] += rep.mean_abs[f];
    }
    rep.e2e_radio_ratio = rep.category_sums[static_cast<std::size_t>(FeatureCategory::E2E)] /
                          rep.category_sums[static_cast<std::size_t>(FeatureCategory::Radio)];
    return rep;
}

} // namespace

Attribution tree_shap(const RegressionTree& tree, const FeatureMatrix& X, std::size_t row) {
    Attribution out;
    out.values.assign(X.n_cols(), 0.0);
    std::vector<PathElement> path_buf;
    tree_shap_into(tree, X, row, 1.0, out.values.data(), path_buf);
    out.base = tree_mean_value(tree);
    return out;
}

Attribution ensemble_shap(const PointBooster& b, const FeatureMatrix& X, std::size_t row) {
    const HeadView h = head_view(b);
    Attribution out;
    out.values.assign(X.n_cols(), 0.0);
    std::vector<PathElement> path_buf;
    head_phi(h, X, row, out.values.data(), path_buf);
    out.base = head_base(h);
    return out;
}

Attribution ensemble_shap(const DistBooster& b, DistHead head, const FeatureMatrix& X,
                          std::size_t row) {
    const HeadView h = head_view(b, head);
    Attribution out;
    out.values.assign(X.n_cols(), 0.0);
    std::vector<PathElement> path_buf;
    head_phi(h, X, row, out.values.data(), path_buf);
    out.base = head_base(h);
    return out;
}

ImportanceReport importance_report(const PointBooster& b, const Dataset& explain_set, Exec exec) {
    return report_for(head_view(b), explain_set, exec);
}

ImportanceReport importance_report(const DistBooster& b, DistHead head,
                                   const Dataset& explain_set, Exec exec) {
    return report_for(head_view(b, head), explain_set, exec);
}

std::vector<std::size_t> stride_sample(std::size_t n, std::size_t cap) {
    if (cap == 0) throw ConfigError("stride_sample: cap must be positive");
    std::vector<std::size_t> rows;
    const std::size_t stride = n <= cap ? 1 : (n + cap - 1) / cap;
    for (std::size_t i = 0; i < n; i += stride) rows.push_back(i);
    return rows;
}

void write_importance_csv(std::ostream& out, const ImportanceReport& report) {
    out << "feature,category,mean_abs,normalized\n";
    for (std::size_t f = 0; f < report.feature.size(); ++f) {
        out << report.feature[f] << ',' << category_label(report.category[f]) << ','
            << fmt_double(report.mean_abs[f]) << ',' << fmt_double(report.normalized[f]) << '\n';
    }
}

} // namespace dlcast
