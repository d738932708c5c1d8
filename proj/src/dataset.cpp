#include "dlcast/dataset.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>

#include "dlcast/errors.hpp"

namespace dlcast {

namespace {

constexpr std::int64_t kSecondsPerDay = 86400;
constexpr std::int64_t kSecondsPerWeek = 7 * kSecondsPerDay;

const std::array<std::string, 7> kDowNames = {"Mon", "Tue", "Wed", "Thu",
                                              "Fri", "Sat", "Sun"};

} // namespace

std::string_view tech_label(Tech t) {
    switch (t) {
    case Tech::LTE: return "LTE";
    case Tech::NR_NSA: return "NR_NSA";
    case Tech::NR_SA: return "NR_SA";
    }
    return "LTE";
}

std::optional<Tech> parse_tech(std::string_view s) {
    if (s == "LTE") return Tech::LTE;
    if (s == "NR_NSA") return Tech::NR_NSA;
    if (s == "NR_SA") return Tech::NR_SA;
    return std::nullopt;
}

std::string_view category_label(FeatureCategory c) {
    switch (c) {
    case FeatureCategory::Radio: return "radio";
    case FeatureCategory::E2E: return "e2e";
    case FeatureCategory::Contextual: return "contextual";
    case FeatureCategory::Deployment: return "deployment";
    }
    return "radio";
}

const std::array<std::string, feat::count>& feature_names() {
    static const std::array<std::string, feat::count> names = {
        "rsrp",      "rsrq",      "sinr",    "timing_advance", "latency_ms",
        "jitter_ms", "ttfb_ms",   "packet_loss", "hour",       "dow",
        "tech",      "carrier",   "band"};
    return names;
}

const std::array<FeatureCategory, feat::count>& feature_categories() {
    static const std::array<FeatureCategory, feat::count> cats = {
        FeatureCategory::Radio,      FeatureCategory::Radio,
        FeatureCategory::Radio,      FeatureCategory::Radio,
        FeatureCategory::E2E,        FeatureCategory::E2E,
        FeatureCategory::E2E,        FeatureCategory::E2E,
        FeatureCategory::Contextual, FeatureCategory::Contextual,
        FeatureCategory::Deployment, FeatureCategory::Deployment,
        FeatureCategory::Deployment};
    return cats;
}

FeatureMatrix::FeatureMatrix(std::size_t rows, std::size_t cols)
    : n_rows_(rows),
      n_cols_(cols),
      values_(rows * cols, std::numeric_limits<double>::quiet_NaN()),
      missing_(rows * cols, 1) {}

void FeatureMatrix::set(std::size_t row, std::size_t col, double value) {
    values_[col * n_rows_ + row] = value;
    missing_[col * n_rows_ + row] = 0;
}

void FeatureMatrix::set_missing(std::size_t row, std::size_t col) {
    values_[col * n_rows_ + row] = std::numeric_limits<double>::quiet_NaN();
    missing_[col * n_rows_ + row] = 1;
}

std::size_t Encoder::encode_building(const std::string& label) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    labels.push_back(label);
    return labels.size() - 1;
}

std::size_t Encoder::encode_frozen(const std::string& label) const {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == label) return i;
    }
    return unseen_code();
}

TargetTransform fit_transform(const std::vector<double>& train_kbps) {
    if (train_kbps.empty()) {
        throw ConfigError("target transform requires a non-empty training partition");
    }
    double sum = 0.0;
    for (double y : train_kbps) sum += std::log1p(y);
    const double mu = sum / static_cast<double>(train_kbps.size());
    double ss = 0.0;
    for (double y : train_kbps) {
        const double d = std::log1p(y) - mu;
        ss += d * d;
    }
    const double sigma = std::sqrt(ss / static_cast<double>(train_kbps.size()));
    if (!(sigma > 0.0)) {
        throw ConfigError("target transform is degenerate: training targets are constant");
    }
    return {mu, sigma};
}

double transform_forward(double y_kbps, const TargetTransform& t) {
    if (y_kbps < 0.0) throw DataError("transform_forward: throughput must be >= 0");
    return (std::log1p(y_kbps) - t.mu_train) / t.sigma_train;
}

double transform_invert(double z, const TargetTransform& t) {
    const double arg = z * t.sigma_train + t.mu_train;
    if (arg > 700.0) {
        static std::atomic<bool> warned{false};
        if (!warned.exchange(true)) {
            std::fprintf(stderr,
                         "warning: transform_invert overflow, saturating to max double\n");
        }
        return std::numeric_limits<double>::max();
    }
    const double y = std::expm1(arg);
    return y < 0.0 ? 0.0 : y;
}

void validate_record(const SampleRecord& rec, std::size_t row_index) {
    auto fail = [row_index](const char* what) {
        throw DataError("row " + std::to_string(row_index) + ": " + what);
    };
    if (!(rec.throughput_kbps >= 0.0)) fail("dl_throughput_kbps must be >= 0");
    if (rec.packet_loss && !(*rec.packet_loss >= 0.0 && *rec.packet_loss <= 1.0)) {
        fail("packet_loss must lie in [0,1]");
    }
    if (rec.latency_ms && !(*rec.latency_ms >= 0.0)) fail("latency_ms must be >= 0");
    if (rec.jitter_ms && !(*rec.jitter_ms >= 0.0)) fail("jitter_ms must be >= 0");
    if (rec.ttfb_ms && !(*rec.ttfb_ms >= 0.0)) fail("ttfb_ms must be >= 0");
}

ContextFields derive_context(std::int64_t timestamp, std::int64_t tz_offset_seconds) {
    const std::int64_t t = timestamp + tz_offset_seconds;
    std::int64_t days = t / kSecondsPerDay;
    std::int64_t rem = t % kSecondsPerDay;
    if (rem < 0) {
        rem += kSecondsPerDay;
        --days;
    }
    ContextFields out;
    out.hour = static_cast<int>(rem / 3600);
    // Epoch day 0 is a Thursday; with Monday = 0 that is index 3.
    out.dow = static_cast<int>(((days + 3) % 7 + 7) % 7);
    return out;
}

std::string_view dow_label(int dow) {
    return kDowNames[static_cast<std::size_t>(dow)];
}

Dataset build_dataset(const std::vector<SampleRecord>& records, const Encoders* frozen,
                      std::int64_t tz_offset_seconds) {
    Dataset ds;
    const std::size_t n = records.size();
    ds.features = FeatureMatrix(n, feat::count);
    ds.target_kbps.resize(n);
    ds.timestamps.resize(n);
    ds.feature_names.assign(feature_names().begin(), feature_names().end());
    ds.feature_category.assign(feature_categories().begin(), feature_categories().end());
    if (frozen) ds.encoders = *frozen;

    auto put_opt = [&ds](std::size_t row, std::size_t col, const std::optional<double>& v) {
        if (v) {
            ds.features.set(row, col, *v);
        } else {
            ds.features.set_missing(row, col);
        }
    };

    for (std::size_t i = 0; i < n; ++i) {
        const SampleRecord& rec = records[i];
        validate_record(rec, i);
        ds.timestamps[i] = rec.timestamp;
        ds.target_kbps[i] = rec.throughput_kbps;

        put_opt(i, feat::rsrp, rec.rsrp);
        put_opt(i, feat::rsrq, rec.rsrq);
        put_opt(i, feat::sinr, rec.sinr);
        put_opt(i, feat::timing_advance, rec.timing_advance);
        put_opt(i, feat::latency_ms, rec.latency_ms);
        put_opt(i, feat::jitter_ms, rec.jitter_ms);
        put_opt(i, feat::ttfb_ms, rec.ttfb_ms);
        put_opt(i, feat::packet_loss, rec.packet_loss);

        const ContextFields ctx = derive_context(rec.timestamp, tz_offset_seconds);
        ds.features.set(i, feat::hour, static_cast<double>(ctx.hour));

        const std::string dow_str(dow_label(ctx.dow));
        const std::string tech_str(tech_label(rec.tech));
        if (frozen) {
            ds.features.set(i, feat::dow,
                            static_cast<double>(ds.encoders.dow.encode_frozen(dow_str)));
            ds.features.set(i, feat::tech,
                            static_cast<double>(ds.encoders.tech.encode_frozen(tech_str)));
            ds.features.set(i, feat::carrier, static_cast<double>(
                                                  ds.encoders.carrier.encode_frozen(rec.carrier)));
            ds.features.set(i, feat::band,
                            static_cast<double>(ds.encoders.band.encode_frozen(rec.band)));
        } else {
            ds.features.set(i, feat::dow,
                            static_cast<double>(ds.encoders.dow.encode_building(dow_str)));
            ds.features.set(i, feat::tech,
                            static_cast<double>(ds.encoders.tech.encode_building(tech_str)));
            ds.features.set(
                i, feat::carrier,
                static_cast<double>(ds.encoders.carrier.encode_building(rec.carrier)));
            ds.features.set(i, feat::band,
                            static_cast<double>(ds.encoders.band.encode_building(rec.band)));
        }
    }
    return ds;
}

void standardize(Dataset& ds, const TargetTransform& t) {
    ds.transform = t;
    ds.target.resize(ds.target_kbps.size());
    for (std::size_t i = 0; i < ds.target_kbps.size(); ++i) {
        ds.target[i] = transform_forward(ds.target_kbps[i], t);
    }
}

SplitIndices temporal_split_indices(const Dataset& ds, int val_weeks, int test_weeks) {
    if (val_weeks < 0 || test_weeks < 0 || val_weeks + test_weeks <= 0) {
        throw ConfigError("temporal_split: week counts must be non-negative and not both zero");
    }
    if (ds.n_rows() == 0) {
        throw ConfigError("temporal_split: dataset is empty");
    }
    std::int64_t t_min = ds.timestamps[0];
    std::int64_t t_max = ds.timestamps[0];
    for (std::int64_t t : ds.timestamps) {
        t_min = std::min(t_min, t);
        t_max = std::max(t_max, t);
    }
    const std::int64_t holdout = static_cast<std::int64_t>(val_weeks + test_weeks) * kSecondsPerWeek;
    if (t_max - t_min <= holdout) {
        throw ConfigError("temporal_split: dataset span must exceed val_weeks + test_weeks");
    }
    const std::int64_t b_val = t_max - holdout;
    const std::int64_t b_test = t_max - static_cast<std::int64_t>(test_weeks) * kSecondsPerWeek;

    SplitIndices idx;
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        const std::int64_t t = ds.timestamps[i];
        if (t < b_val) {
            idx.train.push_back(i);
        } else if (t < b_test) {
            idx.val.push_back(i);
        } else {
            idx.test.push_back(i);
        }
    }
    return idx;
}

SplitResult temporal_split(const Dataset& ds, int val_weeks, int test_weeks) {
    const SplitIndices idx = temporal_split_indices(ds, val_weeks, test_weeks);
    return {subset(ds, idx.train), subset(ds, idx.val), subset(ds, idx.test)};
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.features = FeatureMatrix(rows.size(), ds.features.n_cols());
    out.target_kbps.resize(rows.size());
    out.timestamps.resize(rows.size());
    out.feature_names = ds.feature_names;
    out.feature_category = ds.feature_category;
    out.encoders = ds.encoders;
    out.transform = ds.transform;
    if (!ds.target.empty()) out.target.resize(rows.size());

    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        for (std::size_t c = 0; c < ds.features.n_cols(); ++c) {
            if (ds.features.is_missing(i, c)) {
                out.features.set_missing(k, c);
            } else {
                out.features.set(k, c, ds.features.at(i, c));
            }
        }
        out.target_kbps[k] = ds.target_kbps[i];
        out.timestamps[k] = ds.timestamps[i];
        if (!ds.target.empty()) out.target[k] = ds.target[i];
    }
    return out;
}

} // namespace dlcast
