#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/dist_booster.hpp"
#include "dlcast/parallel.hpp"
#include "dlcast/point_booster.hpp"
#include "dlcast/tree.hpp"

namespace dlcast {

struct Attribution {
    std::vector<double> values; // per-feature SHAP contributions
    double base = 0.0;          // expected model output over the training background
};

enum class DistHead { Mu, LogSigma };

// Exact path-dependent TreeSHAP for one tree: Shapley values of the
// cover-weighted tree traversal game. Missing features follow the learned
// default direction when present in a coalition. base + sum(values) equals
// the tree's prediction for the row.
Attribution tree_shap(const RegressionTree& tree, const FeatureMatrix& X, std::size_t row);

// Ensemble attributions scaled per the update rules:
//   point:       base_score + lr * sum_t tree_t  ->  values scaled by lr
//   dist heads:  init       - lr * sum_t rho_t * tree_t  ->  scaled by -lr*rho_t
// Sums run over t < best_iteration.
Attribution ensemble_shap(const PointBooster& b, const FeatureMatrix& X, std::size_t row);
Attribution ensemble_shap(const DistBooster& b, DistHead head, const FeatureMatrix& X,
                          std::size_t row);

struct ImportanceReport {
    std::vector<std::string> feature;
    std::vector<FeatureCategory> category;
    std::vector<double> mean_abs;   // mean |SHAP| per feature over the explanation set
    std::vector<double> normalized; // mean_abs / max(mean_abs)
    std::array<double, 4> category_sums{}; // indexed by FeatureCategory
    double e2e_radio_ratio = 0.0;
};

ImportanceReport importance_report(const PointBooster& b, const Dataset& explain_set,
                                   Exec exec = Exec::Serial);
ImportanceReport importance_report(const DistBooster& b, DistHead head,
                                   const Dataset& explain_set, Exec exec = Exec::Serial);

// Deterministic stride subsample: every k-th index with the smallest k that
// brings the count within cap.
std::vector<std::size_t> stride_sample(std::size_t n, std::size_t cap);

// CSV with columns feature,category,mean_abs,normalized.
void write_importance_csv(std::ostream& out, const ImportanceReport& report);

} // namespace dlcast
