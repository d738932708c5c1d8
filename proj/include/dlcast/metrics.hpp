#pragma once

#include <optional>
#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/normal.hpp"

namespace dlcast {

struct PointMetrics {
    double mae_std = 0.0;
    double rmse_std = 0.0;
    double mae_kbps = 0.0;
    double rmse_kbps = 0.0;
    std::optional<double> r2; // absent when the targets have zero variance
};

struct CalibrationCurve {
    std::vector<double> nominal;   // central coverage levels c = 1 - alpha
    std::vector<double> empirical; // observed coverage fractions
};

struct ProbMetrics {
    double crps_std = 0.0;
    double c_auc = 0.0;
    double coverage95 = 0.0;
};

// Errors are computed in standardized-log space and, after inverting both
// targets and predictions through the transform, in kbps.
PointMetrics point_metrics(const std::vector<double>& y, const std::vector<double>& pred,
                           const TargetTransform& t);

double crps_mean(const std::vector<NormalParams>& preds, const std::vector<double>& y);
double crps_mean(const std::vector<double>& point_preds, const std::vector<double>& y);

double nll_mean(const std::vector<NormalParams>& preds, const std::vector<double>& y);

// Default nominal grid: {0, 0.05, ..., 0.95, 1} with pinned endpoints.
std::vector<double> default_calibration_grid();

// Fraction of y values inside the closed central interval
// [mu + sigma*Q((1-c)/2), mu + sigma*Q((1+c)/2)] per grid level; c=0 maps to
// 0 and c=1 to 1 by convention.
CalibrationCurve calibration_curve(const std::vector<NormalParams>& preds,
                                   const std::vector<double>& y,
                                   const std::vector<double>& grid = default_calibration_grid());

// Trapezoidal integral of |empirical - nominal| over the curve's grid.
double c_auc(const CalibrationCurve& curve);

double interval_coverage(const std::vector<NormalParams>& preds, const std::vector<double>& y,
                         double c);

// "nominal,empirical\n" header plus one row per grid level.
std::string calibration_csv(const CalibrationCurve& curve);

} // namespace dlcast
