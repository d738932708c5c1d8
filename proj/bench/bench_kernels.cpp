// Times the data-parallel kernels against their serial reference and checks
// that both produce bit-identical results.
//
//   bench_kernels [rows]   (default 20000)

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/dist_booster.hpp"
#include "dlcast/parallel.hpp"
#include "dlcast/point_booster.hpp"
#include "dlcast/synth.hpp"
#include "dlcast/tree.hpp"
#include "dlcast/treeshap.hpp"

using namespace dlcast;

namespace {

template <class F>
double best_ms(F&& f, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

bool same(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) return false;
    }
    return true;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-22s %10.2f ms %10.2f ms   x%-6.2f %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, identical ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv) {
    const std::size_t rows = argc > 1 ? static_cast<std::size_t>(std::atoll(argv[1])) : 20000;
    std::printf("rows=%zu threads=%d\n\n", rows, max_threads());

    GeneratorConfig gc;
    gc.tech = Tech::NR_SA;
    gc.n_rows = rows;
    gc.seed = 1;
    gc.missing_rates.fill(0.05);
    SynthResult syn = generate(gc);
    Dataset& ds = syn.data;
    standardize(ds, fit_transform(ds.target_kbps));

    SplitResult parts = temporal_split(ds, 1, 2);

    {
        TreeConfig cfg;
        cfg.max_depth = 6;
        const SplitIndex index = build_split_index(ds.features, ds.target);
        RegressionTree ts, tp;
        const double ser = best_ms([&] { ts = fit_tree(index, ds.target, cfg, Exec::Serial); }, 3);
        const double par = best_ms([&] { tp = fit_tree(index, ds.target, cfg, Exec::Parallel); }, 3);
        std::vector<double> ps(ds.n_rows(), 0.0), pp(ds.n_rows(), 0.0);
        accumulate_tree(ts, ds.features, 1.0, ps, Exec::Serial);
        accumulate_tree(tp, ds.features, 1.0, pp, Exec::Serial);
        report("fit_tree d6", ser, par, same(ps, pp));

        std::vector<double> as(ds.n_rows(), 0.0), ap(ds.n_rows(), 0.0);
        const double aser = best_ms([&] {
            std::fill(as.begin(), as.end(), 0.0);
            accumulate_tree(ts, ds.features, 0.05, as, Exec::Serial);
        }, 5);
        const double apar = best_ms([&] {
            std::fill(ap.begin(), ap.end(), 0.0);
            accumulate_tree(ts, ds.features, 0.05, ap, Exec::Parallel);
        }, 5);
        report("accumulate_tree", aser, apar, same(as, ap));
    }

    {
        PointConfig cfg;
        cfg.max_iters = 30;
        cfg.patience = 30;
        PointBooster bs, bp;
        const double ser =
            best_ms([&] { bs = fit_point_booster(parts.train, parts.val, cfg, Exec::Serial); }, 1);
        const double par =
            best_ms([&] { bp = fit_point_booster(parts.train, parts.val, cfg, Exec::Parallel); }, 1);
        const auto ps = predict_point(bs, parts.test.features, Exec::Serial);
        const auto pp = predict_point(bp, parts.test.features, Exec::Parallel);
        report("point booster 30it", ser, par, same(ps, pp));
    }

    {
        DistConfig cfg;
        cfg.max_iters = 20;
        cfg.patience = 20;
        DistBooster bs, bp;
        const double ser =
            best_ms([&] { bs = fit_dist_booster(parts.train, parts.val, cfg, Exec::Serial); }, 1);
        const double par =
            best_ms([&] { bp = fit_dist_booster(parts.train, parts.val, cfg, Exec::Parallel); }, 1);
        const auto qs = predict_dist(bs, parts.test.features, Exec::Serial);
        const auto qp = predict_dist(bp, parts.test.features, Exec::Parallel);
        std::vector<double> ms(qs.size()), mp(qp.size());
        for (std::size_t i = 0; i < qs.size(); ++i) ms[i] = qs[i].mu + qs[i].log_sigma;
        for (std::size_t i = 0; i < qp.size(); ++i) mp[i] = qp[i].mu + qp[i].log_sigma;
        report("dist booster 20it", ser, par, same(ms, mp));

        const std::size_t cap = std::min<std::size_t>(2000, parts.test.n_rows());
        Dataset ex = subset(parts.test, stride_sample(parts.test.n_rows(), cap));
        ImportanceReport rs, rp;
        const double iser =
            best_ms([&] { rs = importance_report(bs, DistHead::Mu, ex, Exec::Serial); }, 1);
        const double ipar =
            best_ms([&] { rp = importance_report(bs, DistHead::Mu, ex, Exec::Parallel); }, 1);
        report("importance 2k rows", iser, ipar, same(rs.mean_abs, rp.mean_abs));
    }

    return 0;
}
