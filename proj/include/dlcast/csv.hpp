#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dlcast/dataset.hpp"

namespace dlcast {

// Canonical column order for measurement CSVs.
const std::vector<std::string>& csv_columns();

struct IngestResult {
    Dataset data;
    std::size_t rows_dropped_missing_target = 0;
};

// Parses a measurement CSV. The header must contain exactly the canonical
// columns (any order). Empty numeric cells are recorded as missing; rows with
// an empty target cell are dropped and counted; any malformed cell raises
// DataError naming the data row.
IngestResult ingest_csv(std::istream& in, const Encoders* frozen = nullptr,
                        std::int64_t tz_offset_seconds = 0);
IngestResult ingest_csv_file(const std::string& path, const Encoders* frozen = nullptr,
                             std::int64_t tz_offset_seconds = 0);

void write_csv(std::ostream& out, const std::vector<SampleRecord>& records);
void write_csv_file(const std::string& path, const std::vector<SampleRecord>& records);

// Reconstructs records from an ingested Dataset (derived columns are
// recomputed from the timestamp on the next ingest). Together with write_csv
// this makes ingestion lossless for everything the file carried.
std::vector<SampleRecord> records_from_dataset(const Dataset& ds);

// Accepts integer epoch seconds or ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS[Z]".
std::int64_t parse_timestamp(const std::string& s);

} // namespace dlcast
