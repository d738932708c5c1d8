#pragma once

#include <limits>

namespace dlcast {

// Validation-metric tracker shared by both boosters. The reported best
// iteration is the exact argmin (ties -> earliest); the patience counter
// uses a 1e-12 absolute improvement tolerance so float noise cannot stall
// termination.
class EarlyStopper {
public:
    explicit EarlyStopper(int patience) : patience_(patience) {}

    // Record the metric at iteration k (k = number of trees so far; call
    // first with k=0 for the base model). Returns true when patience is
    // exhausted and boosting should stop.
    bool record(double metric) {
        const int k = evaluated_++;
        if (metric < best_exact_) {
            best_exact_ = metric;
            best_k_ = k;
        }
        if (k == 0) {
            best_tol_ = metric;
            return false;
        }
        if (metric < best_tol_ - kTol) {
            since_improve_ = 0;
        } else {
            ++since_improve_;
        }
        if (metric < best_tol_) best_tol_ = metric;
        return since_improve_ >= patience_;
    }

    int best_iteration() const { return best_k_; }
    double best_metric() const { return best_exact_; }

private:
    static constexpr double kTol = 1e-12;
    int patience_;
    int evaluated_ = 0;
    int best_k_ = 0;
    int since_improve_ = 0;
    double best_exact_ = std::numeric_limits<double>::infinity();
    double best_tol_ = std::numeric_limits<double>::infinity();
};

} // namespace dlcast
