#pragma once

#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/parallel.hpp"
#include "dlcast/tree.hpp"

namespace dlcast {

struct PointConfig {
    int max_depth = 6;
    double learning_rate = 0.05;
    int max_iters = 1000;
    int patience = 100;
    int min_samples_leaf = 1;
};

// Residual-fit gradient booster:
//   prediction(x) = base_score + learning_rate * sum_{t < best_iteration} tree_t(x)
struct PointBooster {
    double base_score = 0.0;
    double learning_rate = 0.05;
    std::vector<RegressionTree> trees;
    int best_iteration = 0;
    int n_features = 0;

    // Metric logs from fitting, index k = metric with k trees applied.
    std::vector<double> train_rmse_history;
    std::vector<double> val_rmse_history;
};

PointBooster fit_point_booster(const Dataset& train, const Dataset& val,
                               const PointConfig& cfg = {}, Exec exec = Exec::Serial);

std::vector<double> predict_point(const PointBooster& b, const FeatureMatrix& X,
                                  Exec exec = Exec::Serial);

} // namespace dlcast
