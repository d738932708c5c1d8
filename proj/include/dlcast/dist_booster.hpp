#pragma once

#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/normal.hpp"
#include "dlcast/parallel.hpp"
#include "dlcast/tree.hpp"

namespace dlcast {

struct DistConfig {
    int max_depth = 3;
    double learning_rate = 0.05;
    int max_iters = 1000;
    int patience = 100;
    int min_samples_leaf = 1;
};

// Natural-gradient distributional booster over a Normal head:
//   mu(x)        = init.mu        - lr * sum_{t < best_iteration} rho_t * mu_tree_t(x)
//   log_sigma(x) = init.log_sigma - lr * sum_{t < best_iteration} rho_t * ls_tree_t(x)
struct DistBooster {
    NormalParams init;
    double learning_rate = 0.05;
    std::vector<RegressionTree> mu_trees;
    std::vector<RegressionTree> logsigma_trees;
    std::vector<double> scalings; // per-iteration line-search rho_t
    int best_iteration = 0;
    int n_features = 0;

    std::vector<double> train_nll_history; // index k = mean NLL with k iterations
    std::vector<double> val_nll_history;
};

DistBooster fit_dist_booster(const Dataset& train, const Dataset& val, const DistConfig& cfg = {},
                             Exec exec = Exec::Serial);

// Per-row predictive parameters with log_sigma clamped to [-15, 15].
std::vector<NormalParams> predict_dist(const DistBooster& b, const FeatureMatrix& X,
                                       Exec exec = Exec::Serial);

// Largest rho in {1, 1/2, ..., 2^-20} whose update strictly improves the
// mean training NLL; 2^-20 when none does. The candidate update applied to
// row i is (mu[i] - lr*rho*mu_step[i], log_sigma[i] - lr*rho*ls_step[i]).
double line_search_scale(const std::vector<double>& mu, const std::vector<double>& log_sigma,
                         const std::vector<double>& mu_step, const std::vector<double>& ls_step,
                         const std::vector<double>& y, double lr, Exec exec = Exec::Serial);

} // namespace dlcast
