#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dlcast/dataset.hpp"
#include "dlcast/dist_booster.hpp"
#include "dlcast/parallel.hpp"
#include "dlcast/point_booster.hpp"
#include "dlcast/synth.hpp"

namespace dlcast {

enum class ModelSelection { Point, Dist, Both };

// End-to-end run: one input source (CSV file or generator), temporal split,
// train the selected models, evaluate on the test partition, write artifacts.
struct PipelineConfig {
    std::optional<std::string> input_csv;      // exactly one of input_csv / synth
    std::optional<GeneratorConfig> synth;
    std::optional<Tech> tech_filter;           // CSV input only; synth is single-tech
    ModelSelection models = ModelSelection::Both;
    PointConfig point;
    DistConfig dist;
    int val_weeks = 1;
    int test_weeks = 2;
    std::string out_dir;
    std::size_t explain_cap = 20000;
    std::int64_t tz_offset_seconds = 0;
    Exec exec = Exec::Parallel;
};

struct RunResult {
    std::string metrics_json;          // exact bytes of <out_dir>/metrics.json
    std::string summary;               // aligned text table for the console
    std::vector<std::string> artifacts;  // paths written, relative to out_dir
};

// Throws ConfigError / DataError / TrainError / IoError with a "[stage]"
// prefix naming the pipeline stage that failed.  On failure, files already
// written by this run are removed.
RunResult run_pipeline(const PipelineConfig& cfg);

}  // namespace dlcast
