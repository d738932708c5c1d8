#include "dlcast/dist_booster.hpp"

#include <cmath>
#include <cstdio>

#include "dlcast/early_stop.hpp"
#include "dlcast/errors.hpp"

namespace dlcast {

namespace {

double mean_nll(const std::vector<double>& mu, const std::vector<double>& ls,
                const std::vector<double>& y, std::vector<double>& buf, Exec exec) {
    const std::size_t n = y.size();
    buf.resize(n);
    parallel_for(n, exec, [&](std::size_t i) { buf[i] = nll({mu[i], ls[i]}, y[i]); });
    double sum = 0.0;
    for (double v : buf) sum += v;
    return sum / static_cast<double>(n);
}

} // namespace

double line_search_scale(const std::vector<double>& mu, const std::vector<double>& log_sigma,
                         const std::vector<double>& mu_step, const std::vector<double>& ls_step,
                         const std::vector<double>& y, double lr, Exec exec) {
    if (y.empty()) throw TrainError("line search: at least one row required");
    const std::size_t n = y.size();
    std::vector<double> buf;
    const double nll_now = mean_nll(mu, log_sigma, y, buf, exec);

    double rho = 1.0;
    for (int k = 0; k <= 20; ++k) {
        const double scale = lr * rho;
        parallel_for(n, exec, [&](std::size_t i) {
            buf[i] = nll({mu[i] - scale * mu_step[i], log_sigma[i] - scale * ls_step[i]}, y[i]);
        });
        double sum = 0.0;
        for (double v : buf) sum += v;
        if (sum / static_cast<double>(n) < nll_now) return rho;
        rho *= 0.5;
    }
    return 0x1.0p-20; // no candidate improved; the caller applies it anyway
}

DistBooster fit_dist_booster(const Dataset& train, const Dataset& val, const DistConfig& cfg,
                             Exec exec) {
    if (train.n_rows() == 0) throw TrainError("dist booster: empty training partition");
    if (val.n_rows() == 0) throw TrainError("dist booster: empty validation partition");
    if (train.target.size() != train.n_rows() || val.target.size() != val.n_rows()) {
        throw TrainError("dist booster: datasets must be standardized before fitting");
    }
    if (val.features.n_cols() != train.features.n_cols()) {
        throw TrainError("dist booster: train/val column count mismatch");
    }
    if (!(cfg.learning_rate > 0.0 && cfg.learning_rate <= 1.0)) {
        throw TrainError("dist booster: learning_rate must lie in (0,1]");
    }
    if (cfg.max_iters < 0 || cfg.patience < 1) {
        throw TrainError("dist booster: max_iters must be >= 0 and patience >= 1");
    }

    const std::size_t n = train.n_rows();
    DistBooster b;
    b.learning_rate = cfg.learning_rate;
    b.n_features = static_cast<int>(train.features.n_cols());

    double sum = 0.0;
    for (double y : train.target) sum += y;
    b.init.mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double y : train.target) {
        const double d = y - b.init.mu;
        ss += d * d;
    }
    const double var = ss / static_cast<double>(n);
    if (var > 0.0) {
        b.init.log_sigma = 0.5 * std::log(var);
    } else {
        b.init.log_sigma = kLogSigmaMin;
        std::fprintf(stderr, "warning: constant training targets, init log_sigma clamped\n");
    }

    const SplitIndex index = build_split_index(train.features, train.target);
    const TreeConfig tree_cfg{cfg.max_depth, cfg.min_samples_leaf};

    std::vector<double> mu_raw(n, b.init.mu), ls_raw(n, b.init.log_sigma);
    std::vector<double> val_mu(val.n_rows(), b.init.mu), val_ls(val.n_rows(), b.init.log_sigma);
    std::vector<double> grad_mu(n), grad_ls(n), mu_out(n), ls_out(n), buf;

    b.train_nll_history.push_back(mean_nll(mu_raw, ls_raw, train.target, buf, exec));
    b.val_nll_history.push_back(mean_nll(val_mu, val_ls, val.target, buf, exec));
    EarlyStopper stop(cfg.patience);
    stop.record(b.val_nll_history.back());

    for (int t = 1; t <= cfg.max_iters; ++t) {
        parallel_for(n, exec, [&](std::size_t i) {
            const NormalGradient g = natural_gradient({mu_raw[i], ls_raw[i]}, train.target[i]);
            grad_mu[i] = g.d_mu;
            grad_ls[i] = g.d_log_sigma;
        });

        b.mu_trees.push_back(fit_tree(index, grad_mu, tree_cfg, exec));
        b.logsigma_trees.push_back(fit_tree(index, grad_ls, tree_cfg, exec));
        const RegressionTree& mu_tree = b.mu_trees.back();
        const RegressionTree& ls_tree = b.logsigma_trees.back();

        mu_out.assign(n, 0.0);
        ls_out.assign(n, 0.0);
        accumulate_tree(mu_tree, train.features, 1.0, mu_out, exec);
        accumulate_tree(ls_tree, train.features, 1.0, ls_out, exec);

        const double rho = line_search_scale(mu_raw, ls_raw, mu_out, ls_out, train.target,
                                             cfg.learning_rate, exec);
        b.scalings.push_back(rho);

        const double scale = cfg.learning_rate * rho;
        parallel_for(n, exec, [&](std::size_t i) {
            mu_raw[i] -= scale * mu_out[i];
            ls_raw[i] -= scale * ls_out[i];
        });
        accumulate_tree(mu_tree, val.features, -scale, val_mu, exec);
        accumulate_tree(ls_tree, val.features, -scale, val_ls, exec);

        b.train_nll_history.push_back(mean_nll(mu_raw, ls_raw, train.target, buf, exec));
        b.val_nll_history.push_back(mean_nll(val_mu, val_ls, val.target, buf, exec));
        if (stop.record(b.val_nll_history.back())) break;
    }
    b.best_iteration = stop.best_iteration();
    return b;
}

std::vector<NormalParams> predict_dist(const DistBooster& b, const FeatureMatrix& X, Exec exec) {
    if (static_cast<int>(X.n_cols()) != b.n_features) {
        throw DataError("predict_dist: column count does not match the fitted model");
    }
    const std::size_t n = X.n_rows();
    std::vector<double> mu(n, b.init.mu), ls(n, b.init.log_sigma);
    for (int t = 0; t < b.best_iteration; ++t) {
        const double scale = -b.learning_rate * b.scalings[static_cast<std::size_t>(t)];
        accumulate_tree(b.mu_trees[static_cast<std::size_t>(t)], X, scale, mu, exec);
        accumulate_tree(b.logsigma_trees[static_cast<std::size_t>(t)], X, scale, ls, exec);
    }
    std::vector<NormalParams> out(n);
    parallel_for(n, exec, [&](std::size_t i) { out[i] = clamp_params({mu[i], ls[i]}); });
    return out;
}

} // namespace dlcast
