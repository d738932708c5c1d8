#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "dlcast/dataset.hpp"
#include "dlcast/dist_booster.hpp"
#include "dlcast/point_booster.hpp"

namespace dlcast {

// Context a model needs to be applied to raw CSVs without companion files.
struct ModelMeta {
    Encoders encoders;
    TargetTransform transform;
    std::int64_t tz_offset_seconds = 0;
};

struct PointModel {
    PointBooster booster;
    PointConfig config;
    ModelMeta meta;
};

struct DistModel {
    DistBooster booster;
    DistConfig config;
    ModelMeta meta;
};

using AnyModel = std::variant<PointModel, DistModel>;

// Versioned ("format_version": 1), self-contained JSON with sorted keys and
// round-trip double formatting: byte-deterministic for a given model, and
// loaded models predict bit-identically to the originals.
std::string to_json_string(const PointModel& m);
std::string to_json_string(const DistModel& m);

// Throws DataError naming the first invalid field; rejects unknown versions.
AnyModel model_from_json_string(const std::string& text);

void save_model(const PointModel& m, const std::string& path);
void save_model(const DistModel& m, const std::string& path);
AnyModel load_model(const std::string& path);

} // namespace dlcast
