#pragma once

#include <cstdint>
#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/parallel.hpp"

namespace dlcast {

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0.0;
    bool default_left = true;
    int left = -1;
    int right = -1;
    double value = 0.0; // leaf output: mean of training targets in the leaf
    double cover = 0.0; // training rows reaching the node

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes; // root at index 0
    int max_depth = 0;
};

struct TreeConfig {
    int max_depth = 6;
    int min_samples_leaf = 1;
};

// Presorted view of a training matrix, built once and reused by every tree
// a booster fits. Rows carry a canonical rank (lexicographic in feature
// content, then base target): node row lists and all accumulations follow
// rank order, which makes fitted trees invariant to row permutations and
// pins every floating-point summation order.
struct SplitIndex {
    const FeatureMatrix* X = nullptr;
    std::vector<std::uint32_t> row_of_rank;
    std::vector<std::uint32_t> rank_of_row;
    std::vector<std::vector<std::uint32_t>> present; // per feature, rows by (value, rank)
    std::vector<std::vector<std::uint32_t>> missing; // per feature, rows by rank
};

SplitIndex build_split_index(const FeatureMatrix& X, const std::vector<double>& base_targets);

// Exact greedy CART least-squares fit. Split candidates are midpoints
// between consecutive distinct sorted feature values; missing rows are tried
// on both sides and the better direction is stored. Ties break by higher
// gain, then lower feature index, then lower threshold, then missing-left.
RegressionTree fit_tree(const SplitIndex& index, const std::vector<double>& targets,
                        const TreeConfig& cfg, Exec exec = Exec::Serial);
RegressionTree fit_tree(const FeatureMatrix& X, const std::vector<double>& targets,
                        const TreeConfig& cfg, Exec exec = Exec::Serial);

double predict_tree(const RegressionTree& tree, const FeatureMatrix& X, std::size_t row);

// out[i] += scale * tree(X_i), row-parallel, bit-identical across thread counts.
void accumulate_tree(const RegressionTree& tree, const FeatureMatrix& X, double scale,
                     std::vector<double>& out, Exec exec = Exec::Serial);

int max_feature_index(const RegressionTree& tree);

} // namespace dlcast
