#include "dlcast/metrics.hpp"

#include <cmath>

#include "dlcast/errors.hpp"
#include "dlcast/text.hpp"

namespace dlcast {

namespace {

double coverage_at(const std::vector<NormalParams>& preds, const std::vector<double>& y,
                   double c) {
    const double lo_q = normal_quantile((1.0 - c) / 2.0);
    const double hi_q = normal_quantile((1.0 + c) / 2.0);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double sigma = preds[i].sigma();
        const double lo = preds[i].mu + sigma * lo_q;
        const double hi = preds[i].mu + sigma * hi_q;
        if (y[i] >= lo && y[i] <= hi) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(y.size());
}

} // namespace

PointMetrics point_metrics(const std::vector<double>& y, const std::vector<double>& pred,
                           const TargetTransform& t) {
    if (y.size() != pred.size()) throw DataError("point_metrics: length mismatch");
    if (y.size() < 2) throw DataError("point_metrics: at least two rows required");
    const auto n = static_cast<double>(y.size());

    PointMetrics m;
    double abs_std = 0.0, sq_std = 0.0, abs_kbps = 0.0, sq_kbps = 0.0;
    double y_sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = y[i] - pred[i];
        abs_std += std::abs(d);
        sq_std += d * d;
        const double dk = transform_invert(y[i], t) - transform_invert(pred[i], t);
        abs_kbps += std::abs(dk);
        sq_kbps += dk * dk;
        y_sum += y[i];
    }
    m.mae_std = abs_std / n;
    m.rmse_std = std::sqrt(sq_std / n);
    m.mae_kbps = abs_kbps / n;
    m.rmse_kbps = std::sqrt(sq_kbps / n);

    const double y_mean = y_sum / n;
    double ss_tot = 0.0;
    for (double v : y) {
        const double d = v - y_mean;
        ss_tot += d * d;
    }
    if (ss_tot > 0.0) {
        m.r2 = 1.0 - sq_std / ss_tot;
    }
    return m;
}

double crps_mean(const std::vector<NormalParams>& preds, const std::vector<double>& y) {
    if (preds.size() != y.size()) throw DataError("crps_mean: length mismatch");
    if (y.empty()) throw DataError("crps_mean: at least one row required");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += crps_normal(preds[i], y[i]);
    return sum / static_cast<double>(y.size());
}

double crps_mean(const std::vector<double>& point_preds, const std::vector<double>& y) {
    if (point_preds.size() != y.size()) throw DataError("crps_mean: length mismatch");
    if (y.empty()) throw DataError("crps_mean: at least one row required");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += crps_point(point_preds[i], y[i]);
    return sum / static_cast<double>(y.size());
}

double nll_mean(const std::vector<NormalParams>& preds, const std::vector<double>& y) {
    if (preds.size() != y.size()) throw DataError("nll_mean: length mismatch");
    if (y.empty()) throw DataError("nll_mean: at least one row required");
    double sum = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) sum += nll(preds[i], y[i]);
    return sum / static_cast<double>(y.size());
}

std::vector<double> default_calibration_grid() {
    std::vector<double> grid;
    for (int k = 0; k <= 20; ++k) grid.push_back(static_cast<double>(k) / 20.0);
    return grid;
}

CalibrationCurve calibration_curve(const std::vector<NormalParams>& preds,
                                   const std::vector<double>& y,
                                   const std::vector<double>& grid) {
    if (preds.size() != y.size()) throw DataError("calibration_curve: length mismatch");
    if (y.empty()) throw DataError("calibration_curve: at least one row required");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (!(grid[k] >= 0.0 && grid[k] <= 1.0)) {
            throw ConfigError("calibration_curve: nominal levels must lie in [0,1]");
        }
        if (k > 0 && !(grid[k] > grid[k - 1])) {
            throw ConfigError("calibration_curve: nominal grid must be strictly increasing");
        }
    }
    CalibrationCurve curve;
    curve.nominal = grid;
    curve.empirical.reserve(grid.size());
    for (double c : grid) {
        if (c == 0.0) {
            curve.empirical.push_back(0.0);
        } else if (c == 1.0) {
            curve.empirical.push_back(1.0);
        } else {
            curve.empirical.push_back(coverage_at(preds, y, c));
        }
    }
    return curve;
}

double c_auc(const CalibrationCurve& curve) {
    const auto& nom = curve.nominal;
    const auto& emp = curve.empirical;
    if (nom.size() != emp.size() || nom.size() < 2) {
        throw ConfigError("c_auc: curve needs matching nominal/empirical grids of length >= 2");
    }
    for (std::size_t k = 1; k < nom.size(); ++k) {
        if (!(nom[k] > nom[k - 1])) throw ConfigError("c_auc: nominal grid must be sorted");
    }
    if (nom.front() != 0.0 || nom.back() != 1.0) {
        throw ConfigError("c_auc: nominal grid must contain endpoints 0 and 1");
    }
    double area = 0.0;
    for (std::size_t k = 1; k < nom.size(); ++k) {
        const double a = std::abs(emp[k - 1] - nom[k - 1]);
        const double b = std::abs(emp[k] - nom[k]);
        area += 0.5 * (a + b) * (nom[k] - nom[k - 1]);
    }
    return area;
}

double interval_coverage(const std::vector<NormalParams>& preds, const std::vector<double>& y,
                         double c) {
    if (!(c > 0.0 && c < 1.0)) throw ConfigError("interval_coverage: level must lie in (0,1)");
    if (preds.size() != y.size()) throw DataError("interval_coverage: length mismatch");
    if (y.empty()) throw DataError("interval_coverage: at least one row required");
    return coverage_at(preds, y, c);
}

std::string calibration_csv(const CalibrationCurve& curve) {
    std::string out = "nominal,empirical\n";
    for (std::size_t k = 0; k < curve.nominal.size(); ++k) {
        out += fmt_double(curve.nominal[k]);
        out += ',';
        out += fmt_double(curve.empirical[k]);
        out += '\n';
    }
    return out;
}

} // namespace dlcast
