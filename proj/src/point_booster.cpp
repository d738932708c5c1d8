#include "dlcast/point_booster.hpp"

#include <cmath>

#include "dlcast/early_stop.hpp"
#include "dlcast/errors.hpp"

namespace dlcast {

namespace {

double rmse_of(const std::vector<double>& pred, const std::vector<double>& y) {
    double ss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - pred[i];
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(y.size()));
}

} // namespace

PointBooster fit_point_booster(const Dataset& train, const Dataset& val, const PointConfig& cfg,
                               Exec exec) {
    if (train.n_rows() == 0) throw TrainError("point booster: empty training partition");
    if (val.n_rows() == 0) throw TrainError("point booster: empty validation partition");
    if (train.target.size() != train.n_rows() || val.target.size() != val.n_rows()) {
        throw TrainError("point booster: datasets must be standardized before fitting");
    }
    if (val.features.n_cols() != train.features.n_cols()) {
        throw TrainError("point booster: train/val column count mismatch");
    }
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) {
        throw TrainError("point booster: learning_rate must lie in (0,1]");
    }
    if (cfg.max_iters < 0 || cfg.patience < 1) {
        throw TrainError("point booster: max_iters must be >= 0 and patience >= 1");
    }

    const std::size_t n = train.n_rows();
    PointBooster b;
    b.learning_rate = cfg.learning_rate;
    b.n_features = static_cast<int>(train.features.n_cols());

    double sum = 0.0;
    for (double y : train.target) sum += y;
    b.base_score = sum / static_cast<double>(n);

    const SplitIndex index = build_split_index(train.features, train.target);
    const TreeConfig tree_cfg{cfg.max_depth, cfg.min_samples_leaf};

    std::vector<double> pred_train(n, b.base_score);
    std::vector<double> pred_val(val.n_rows(), b.base_score);
    std::vector<double> residual(n);

    b.train_rmse_history.push_back(rmse_of(pred_train, train.target));
    b.val_rmse_history.push_back(rmse_of(pred_val, val.target));
    EarlyStopper stop(cfg.patience);
    stop.record(b.val_rmse_history.back());

    for (int t = 1; t <= cfg.max_iters; ++t) {
        parallel_for(n, exec,
                     [&](std::size_t i) { residual[i] = train.target[i] - pred_train[i]; });
        b.trees.push_back(fit_tree(index, residual, tree_cfg, exec));
        const RegressionTree& tree = b.trees.back();
        accumulate_tree(tree, train.features, cfg.learning_rate, pred_train, exec);
        accumulate_tree(tree, val.features, cfg.learning_rate, pred_val, exec);

        b.train_rmse_history.push_back(rmse_of(pred_train, train.target));
        b.val_rmse_history.push_back(rmse_of(pred_val, val.target));
        if (stop.record(b.val_rmse_history.back())) break;
    }
    b.best_iteration = stop.best_iteration();
    return b;
}

std::vector<double> predict_point(const PointBooster& b, const FeatureMatrix& X, Exec exec) {
    if (static_cast<int>(X.n_cols()) != b.n_features) {
        throw DataError("predict_point: column count does not match the fitted model");
    }
    std::vector<double> out(X.n_rows(), b.base_score);
    for (int t = 0; t < b.best_iteration; ++t) {
        accumulate_tree(b.trees[static_cast<std::size_t>(t)], X, b.learning_rate, out, exec);
    }
    return out;
}

} // namespace dlcast
