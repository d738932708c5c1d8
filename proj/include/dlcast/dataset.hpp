#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlcast {

enum class Tech { LTE = 0, NR_NSA = 1, NR_SA = 2 };

std::string_view tech_label(Tech t);
std::optional<Tech> parse_tech(std::string_view s);

enum class FeatureCategory { Radio, E2E, Contextual, Deployment };

std::string_view category_label(FeatureCategory c);

// Model feature layout. Radio and E2E columns carry the raw measurements;
// hour is numeric 0-23; dow/tech/carrier/band are ordinal codes.
namespace feat {
inline constexpr std::size_t rsrp = 0;
inline constexpr std::size_t rsrq = 1;
inline constexpr std::size_t sinr = 2;
inline constexpr std::size_t timing_advance = 3;
inline constexpr std::size_t latency_ms = 4;
inline constexpr std::size_t jitter_ms = 5;
inline constexpr std::size_t ttfb_ms = 6;
inline constexpr std::size_t packet_loss = 7;
inline constexpr std::size_t hour = 8;
inline constexpr std::size_t dow = 9;
inline constexpr std::size_t tech = 10;
inline constexpr std::size_t carrier = 11;
inline constexpr std::size_t band = 12;
inline constexpr std::size_t count = 13;
} // namespace feat

const std::array<std::string, feat::count>& feature_names();
const std::array<FeatureCategory, feat::count>& feature_categories();

// Column-major numeric matrix with an explicit missingness mask. Missing
// cells also hold NaN so accidental use of a masked value poisons results
// instead of silently passing.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols);

    std::size_t n_rows() const { return n_rows_; }
    std::size_t n_cols() const { return n_cols_; }

    double at(std::size_t row, std::size_t col) const {
        return values_[col * n_rows_ + row];
    }
    bool is_missing(std::size_t row, std::size_t col) const {
        return missing_[col * n_rows_ + row] != 0;
    }

    void set(std::size_t row, std::size_t col, double value);
    void set_missing(std::size_t row, std::size_t col);

    const double* column(std::size_t col) const { return values_.data() + col * n_rows_; }
    const std::uint8_t* missing_column(std::size_t col) const {
        return missing_.data() + col * n_rows_;
    }

private:
    std::size_t n_rows_ = 0;
    std::size_t n_cols_ = 0;
    std::vector<double> values_;
    std::vector<std::uint8_t> missing_;
};

// First-appearance ordinal encoder. Codes are assigned in the order labels
// are first observed; a frozen encoder maps unseen labels to labels.size().
struct Encoder {
    std::vector<std::string> labels;

    std::size_t encode_building(const std::string& label);
    std::size_t encode_frozen(const std::string& label) const;
    std::size_t unseen_code() const { return labels.size(); }
};

struct Encoders {
    Encoder tech;
    Encoder carrier;
    Encoder band;
    Encoder dow;
};

// Standardization of ln(1+y): z = (ln(1+y) - mu_train) / sigma_train.
struct TargetTransform {
    double mu_train = 0.0;
    double sigma_train = 1.0;
};

TargetTransform fit_transform(const std::vector<double>& train_kbps);
double transform_forward(double y_kbps, const TargetTransform& t);
double transform_invert(double z, const TargetTransform& t);

// One parsed measurement row. Optional fields model the CSV's empty cells.
struct SampleRecord {
    std::int64_t timestamp = 0;
    Tech tech = Tech::LTE;
    std::string carrier;
    std::string band;
    std::optional<double> rsrp;
    std::optional<double> rsrq;
    std::optional<double> sinr;
    std::optional<double> timing_advance;
    std::optional<double> latency_ms;
    std::optional<double> jitter_ms;
    std::optional<double> ttfb_ms;
    std::optional<double> packet_loss;
    double throughput_kbps = 0.0;
};

// Throws DataError naming the offending row when a range invariant fails.
void validate_record(const SampleRecord& rec, std::size_t row_index);

struct Dataset {
    FeatureMatrix features;
    std::vector<double> target;      // standardized log units; empty until standardize()
    std::vector<double> target_kbps; // raw kbps, always populated
    std::vector<std::int64_t> timestamps;
    std::vector<std::string> feature_names;
    std::vector<FeatureCategory> feature_category;
    Encoders encoders;
    TargetTransform transform; // identity until standardize()

    std::size_t n_rows() const { return features.n_rows(); }
};

// (hour 0-23, dow 0-6 with 0 = Monday) in the configured timezone,
// expressed as a fixed offset from UTC in seconds.
struct ContextFields {
    int hour = 0;
    int dow = 0;
};

ContextFields derive_context(std::int64_t timestamp, std::int64_t tz_offset_seconds = 0);

std::string_view dow_label(int dow);

// Assembles the feature matrix from parsed records. With frozen == nullptr
// encoders are built in first-appearance order; otherwise the provided
// encoders are applied read-only and unseen labels get the reserved code.
Dataset build_dataset(const std::vector<SampleRecord>& records, const Encoders* frozen = nullptr,
                      std::int64_t tz_offset_seconds = 0);

// Fits the transform on this dataset's raw targets and fills `target`.
void standardize(Dataset& ds, const TargetTransform& t);

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> val;
    std::vector<std::size_t> test;
};

// Row partition by time: boundaries at t_max - test_weeks*7d and
// t_max - (test_weeks+val_weeks)*7d; original row order preserved within
// each partition.
SplitIndices temporal_split_indices(const Dataset& ds, int val_weeks = 1, int test_weeks = 2);

SplitResult temporal_split(const Dataset& ds, int val_weeks = 1, int test_weeks = 2);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& rows);

} // namespace dlcast
