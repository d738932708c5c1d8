#include "dlcast/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dlcast/errors.hpp"

namespace dlcast {

namespace {

void check_targets(const FeatureMatrix& X, const std::vector<double>& y) {
    if (X.n_rows() == 0) throw TrainError("tree fit: empty input");
    if (y.size() != X.n_rows()) throw TrainError("tree fit: target length mismatch");
    for (double v : y) {
        if (!std::isfinite(v)) throw TrainError("tree fit: non-finite target");
    }
}

struct SplitCand {
    double gain = 0.0; // SSE reduction; a candidate is stored only if > 0
    double threshold = 0.0;
    int feature = -1;
    bool default_left = true;
};

struct Work {
    int node = 0;
    int depth = 0;
    std::vector<std::uint32_t> rows; // rank order
    double sum = 0.0;
    double y_min = 0.0;
    double y_max = 0.0;
};

} // namespace

SplitIndex build_split_index(const FeatureMatrix& X, const std::vector<double>& base_targets) {
    check_targets(X, base_targets);
    const std::size_t n = X.n_rows();
    const std::size_t nf = X.n_cols();

    SplitIndex idx;
    idx.X = &X;
    idx.row_of_rank.resize(n);
    std::iota(idx.row_of_rank.begin(), idx.row_of_rank.end(), 0u);
    std::sort(idx.row_of_rank.begin(), idx.row_of_rank.end(),
              [&](std::uint32_t a, std::uint32_t b) {
                  for (std::size_t j = 0; j < nf; ++j) {
                      const bool ma = X.is_missing(a, j);
                      const bool mb = X.is_missing(b, j);
                      if (ma != mb) return mb; // present sorts before missing
                      if (!ma) {
                          const double va = X.at(a, j);
                          const double vb = X.at(b, j);
                          if (va != vb) return va < vb;
                      }
                  }
                  return base_targets[a] < base_targets[b];
              });
    idx.rank_of_row.resize(n);
    for (std::size_t r = 0; r < n; ++r) idx.rank_of_row[idx.row_of_rank[r]] = static_cast<std::uint32_t>(r);

    idx.present.resize(nf);
    idx.missing.resize(nf);
    for (std::size_t j = 0; j < nf; ++j) {
        for (std::size_t r = 0; r < n; ++r) {
            const std::uint32_t row = idx.row_of_rank[r];
            if (X.is_missing(row, j)) {
                idx.missing[j].push_back(row);
            } else {
                idx.present[j].push_back(row);
            }
        }
        // Stable sort of a rank-ordered list gives (value, rank) order.
        std::stable_sort(idx.present[j].begin(), idx.present[j].end(),
                         [&](std::uint32_t a, std::uint32_t b) { return X.at(a, j) < X.at(b, j); });
    }
    return idx;
}

RegressionTree fit_tree(const SplitIndex& index, const std::vector<double>& targets,
                        const TreeConfig& cfg, Exec exec) {
    const FeatureMatrix& X = *index.X;
    check_targets(X, targets);
    if (cfg.max_depth < 0) throw TrainError("tree fit: max_depth must be >= 0");
    if (cfg.min_samples_leaf < 1) throw TrainError("tree fit: min_samples_leaf must be >= 1");

    const std::size_t n = X.n_rows();
    const std::size_t nf = X.n_cols();
    const double msl = static_cast<double>(cfg.min_samples_leaf);

    RegressionTree tree;
    tree.max_depth = cfg.max_depth;
    tree.nodes.push_back(TreeNode{});
    tree.nodes[0].cover = static_cast<double>(n);

    Work root;
    root.node = 0;
    root.depth = 0;
    root.rows = {index.row_of_rank.begin(), index.row_of_rank.end()};
    root.sum = 0.0;
    root.y_min = targets[root.rows[0]];
    root.y_max = root.y_min;
    for (std::uint32_t r : root.rows) {
        root.sum += targets[r];
        root.y_min = std::min(root.y_min, targets[r]);
        root.y_max = std::max(root.y_max, targets[r]);
    }

    std::vector<int> slot_of_row(n, -1);
    std::vector<Work> level;
    level.push_back(std::move(root));

    while (!level.empty()) {
        std::vector<Work> next_level;
        std::vector<std::size_t> splittable;
        for (std::size_t i = 0; i < level.size(); ++i) {
            Work& w = level[i];
            const bool must_leaf = w.depth >= cfg.max_depth ||
                                   w.rows.size() < 2 * static_cast<std::size_t>(cfg.min_samples_leaf) ||
                                   w.y_min == w.y_max;
            if (must_leaf) {
                tree.nodes[w.node].value = w.sum / static_cast<double>(w.rows.size());
            } else {
                splittable.push_back(i);
            }
        }
        if (splittable.empty()) break;

        const std::size_t S = splittable.size();
        for (std::size_t s = 0; s < S; ++s) {
            for (std::uint32_t r : level[splittable[s]].rows) slot_of_row[r] = static_cast<int>(s);
        }

        // Per-feature best candidates; features scan independently, then a
        // serial reduction in feature order keeps tie-breaking deterministic.
        std::vector<SplitCand> feature_best(nf * S);
        parallel_for(nf, exec, [&](std::size_t j) {
            std::vector<std::uint32_t> miss_cnt(S, 0);
            std::vector<double> miss_sum(S, 0.0);
            for (std::uint32_t r : index.missing[j]) {
                const int s = slot_of_row[r];
                if (s < 0) continue;
                ++miss_cnt[s];
                miss_sum[s] += targets[r];
            }

            std::vector<std::uint32_t> left_cnt(S, 0);
            std::vector<double> left_sum(S, 0.0);
            std::vector<double> prev_val(S, 0.0);
            std::vector<std::uint8_t> started(S, 0);

            SplitCand* best = feature_best.data() + j * S;
            for (std::uint32_t r : index.present[j]) {
                const int s = slot_of_row[r];
                if (s < 0) continue;
                const double v = X.at(r, j);
                if (started[s] && v > prev_val[s]) {
                    const Work& w = level[splittable[static_cast<std::size_t>(s)]];
                    const double n_total = static_cast<double>(w.rows.size());
                    const double s_total = w.sum;
                    const double n_miss = static_cast<double>(miss_cnt[s]);
                    const double s_miss = miss_sum[s];
                    const double n_lp = static_cast<double>(left_cnt[s]);
                    const double s_lp = left_sum[s];
                    const double n_rp = n_total - n_miss - n_lp;
                    const double s_rp = s_total - s_miss - s_lp;

                    const double nL_l = n_lp + n_miss, nR_l = n_rp;
                    const double nL_r = n_lp, nR_r = n_rp + n_miss;
                    const bool ok_l = nL_l >= msl && nR_l >= msl;
                    const bool ok_r = nL_r >= msl && nR_r >= msl;
                    if (ok_l || ok_r) {
                        const double score_l =
                            ok_l ? (s_lp + s_miss) * (s_lp + s_miss) / nL_l + s_rp * s_rp / nR_l
                                 : -std::numeric_limits<double>::infinity();
                        const double score_r =
                            ok_r ? s_lp * s_lp / nL_r +
                                       (s_rp + s_miss) * (s_rp + s_miss) / nR_r
                                 : -std::numeric_limits<double>::infinity();
                        const bool go_left = score_l >= score_r; // tie -> missing left
                        const double score = go_left ? score_l : score_r;
                        const double gain = score - s_total * s_total / n_total;
                        if (gain > best[s].gain) {
                            double th = prev_val[s] + 0.5 * (v - prev_val[s]);
                            if (!(th > prev_val[s])) th = v; // rounding fallback
                            best[s].gain = gain;
                            best[s].threshold = th;
                            best[s].feature = static_cast<int>(j);
                            best[s].default_left = go_left;
                        }
                    }
                }
                started[s] = 1;
                prev_val[s] = v;
                ++left_cnt[s];
                left_sum[s] += targets[r];
            }
        });

        for (std::size_t s = 0; s < S; ++s) {
            Work& w = level[splittable[s]];
            SplitCand best;
            for (std::size_t j = 0; j < nf; ++j) {
                const SplitCand& cand = feature_best[j * S + s];
                if (cand.gain > best.gain) best = cand;
            }
            for (std::uint32_t r : w.rows) slot_of_row[r] = -1;

            if (best.feature < 0) {
                tree.nodes[w.node].value = w.sum / static_cast<double>(w.rows.size());
                continue;
            }

            Work left, right;
            left.depth = right.depth = w.depth + 1;
            for (std::uint32_t r : w.rows) {
                const bool miss = X.is_missing(r, best.feature);
                const bool go_left =
                    miss ? best.default_left : X.at(r, static_cast<std::size_t>(best.feature)) < best.threshold;
                Work& child = go_left ? left : right;
                if (child.rows.empty()) {
                    child.y_min = child.y_max = targets[r];
                } else {
                    child.y_min = std::min(child.y_min, targets[r]);
                    child.y_max = std::max(child.y_max, targets[r]);
                }
                child.rows.push_back(r);
                child.sum += targets[r];
            }

            TreeNode& parent = tree.nodes[w.node];
            parent.feature = best.feature;
            parent.threshold = best.threshold;
            parent.default_left = best.default_left;
            parent.left = static_cast<int>(tree.nodes.size());
            parent.right = parent.left + 1;
            left.node = parent.left;
            right.node = parent.right;

            TreeNode ln, rn;
            ln.cover = static_cast<double>(left.rows.size());
            rn.cover = static_cast<double>(right.rows.size());
            tree.nodes.push_back(ln);
            tree.nodes.push_back(rn);
            next_level.push_back(std::move(left));
            next_level.push_back(std::move(right));
        }
        level = std::move(next_level);
    }
    return tree;
}

RegressionTree fit_tree(const FeatureMatrix& X, const std::vector<double>& targets,
                        const TreeConfig& cfg, Exec exec) {
    const SplitIndex index = build_split_index(X, targets);
    return fit_tree(index, targets, cfg, exec);
}

double predict_tree(const RegressionTree& tree, const FeatureMatrix& X, std::size_t row) {
    int node = 0;
    while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& nd = tree.nodes[static_cast<std::size_t>(node)];
        const auto f = static_cast<std::size_t>(nd.feature);
        if (f >= X.n_cols()) throw DataError("predict: row width does not match the fitted tree");
        bool go_left;
        if (X.is_missing(row, f)) {
            go_left = nd.default_left;
        } else {
            go_left = X.at(row, f) < nd.threshold;
        }
        node = go_left ? nd.left : nd.right;
    }
    return tree.nodes[static_cast<std::size_t>(node)].value;
}

void accumulate_tree(const RegressionTree& tree, const FeatureMatrix& X, double scale,
                     std::vector<double>& out, Exec exec) {
    if (out.size() != X.n_rows()) throw DataError("accumulate: output length mismatch");
    if (max_feature_index(tree) >= static_cast<int>(X.n_cols())) {
        throw DataError("predict: row width does not match the fitted tree");
    }
    parallel_for(X.n_rows(), exec,
                 [&](std::size_t i) { out[i] += scale * predict_tree(tree, X, i); });
}

int max_feature_index(const RegressionTree& tree) {
    int mx = -1;
    for (const TreeNode& nd : tree.nodes) mx = std::max(mx, nd.feature);
    return mx;
}

} // namespace dlcast
