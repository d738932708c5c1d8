#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/normal.hpp"

namespace dlcast {

// Indices into GeneratorConfig::missing_rates (the optional numeric columns).
namespace miss {
inline constexpr std::size_t rsrp = 0;
inline constexpr std::size_t rsrq = 1;
inline constexpr std::size_t sinr = 2;
inline constexpr std::size_t timing_advance = 3;
inline constexpr std::size_t latency = 4;
inline constexpr std::size_t jitter = 5;
inline constexpr std::size_t ttfb = 6;
inline constexpr std::size_t packet_loss = 7;
inline constexpr std::size_t count = 8;
} // namespace miss

struct GeneratorConfig {
    Tech tech = Tech::NR_SA;
    std::size_t n_rows = 1000;
    std::uint64_t seed = 0;
    int span_weeks = 16;
    std::array<double, miss::count> missing_rates{}; // independent per-cell probabilities
    bool homoscedastic = false; // freeze sigma(x) at the profile's base value
};

// True parameters of ln(1+throughput_kbps) for every generated row, recorded
// before the target was sampled.
struct GroundTruth {
    std::vector<double> mu_log;
    std::vector<double> sigma_log;
};

struct SynthResult {
    Dataset data;
    GroundTruth truth;
    std::vector<SampleRecord> records; // same rows, CSV-ready
};

SynthResult generate(const GeneratorConfig& cfg);

// Ground truth mapped into a fitted transform's standardized space.
std::vector<NormalParams> standardized(const GroundTruth& gt, const TargetTransform& t);

GroundTruth truth_subset(const GroundTruth& gt, const std::vector<std::size_t>& rows);

// Mean NLL of the true parameters against log-space targets ln(1+kbps):
// the achievable floor for any fitted distributional model (up to noise).
double true_nll(const GroundTruth& gt, const std::vector<double>& y_log);

// Sidecar CSV: row_index,true_mu,true_sigma (log space).
void write_truth_csv(const std::string& path, const GroundTruth& gt);

} // namespace dlcast
