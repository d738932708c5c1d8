#include "dlcast/csv.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "dlcast/errors.hpp"
#include "dlcast/text.hpp"

namespace dlcast {

namespace {

const std::vector<std::string> kColumns = {
    "timestamp",  "tech",      "carrier",    "band",        "rsrp",
    "rsrq",       "sinr",      "timing_advance", "latency_ms", "jitter_ms",
    "ttfb_ms",    "packet_loss", "dl_throughput_kbps"};

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
std::int64_t days_from_civil(std::int64_t y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const std::int64_t yoe = y - era * 400;
    const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

bool is_leap(std::int64_t y) {
    return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
}

int days_in_month(std::int64_t y, int m) {
    static const std::array<int, 12> days = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (m == 2 && is_leap(y)) return 29;
    return days[m - 1];
}

std::optional<std::int64_t> parse_iso8601(const std::string& s) {
    // YYYY-MM-DD[T ]HH:MM:SS with an optional trailing Z.
    std::string t = s;
    if (!t.empty() && t.back() == 'Z') t.pop_back();
    if (t.size() != 19) return std::nullopt;
    if (t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') || t[13] != ':' ||
        t[16] != ':') {
        return std::nullopt;
    }
    const auto year = parse_int(t.substr(0, 4));
    const auto month = parse_int(t.substr(5, 2));
    const auto day = parse_int(t.substr(8, 2));
    const auto hh = parse_int(t.substr(11, 2));
    const auto mm = parse_int(t.substr(14, 2));
    const auto ss = parse_int(t.substr(17, 2));
    if (!year || !month || !day || !hh || !mm || !ss) return std::nullopt;
    if (*month < 1 || *month > 12) return std::nullopt;
    if (*day < 1 || *day > days_in_month(*year, static_cast<int>(*month))) return std::nullopt;
    if (*hh > 23 || *mm > 59 || *ss > 59) return std::nullopt;
    return days_from_civil(*year, static_cast<int>(*month), static_cast<int>(*day)) * 86400 +
           *hh * 3600 + *mm * 60 + *ss;
}

} // namespace

const std::vector<std::string>& csv_columns() {
    return kColumns;
}

std::int64_t parse_timestamp(const std::string& s) {
    if (const auto epoch = parse_int(s)) return *epoch;
    if (const auto iso = parse_iso8601(s)) return *iso;
    throw DataError("unparseable timestamp '" + s + "'");
}

IngestResult ingest_csv(std::istream& in, const Encoders* frozen,
                        std::int64_t tz_offset_seconds) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("csv: empty input, header row required");
    }
    const std::vector<std::string> header = split_fields(strip_cr(line));

    // Map each canonical column to its position in this file.
    std::vector<std::size_t> col_pos(kColumns.size());
    std::vector<bool> seen(kColumns.size(), false);
    for (std::size_t j = 0; j < header.size(); ++j) {
        bool known = false;
        for (std::size_t k = 0; k < kColumns.size(); ++k) {
            if (header[j] == kColumns[k]) {
                if (seen[k]) throw DataError("csv: duplicate column '" + header[j] + "'");
                seen[k] = true;
                col_pos[k] = j;
                known = true;
                break;
            }
        }
        if (!known) throw DataError("csv: unknown column '" + header[j] + "'");
    }
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (!seen[k]) throw DataError("csv: missing column '" + kColumns[k] + "'");
    }

    std::vector<SampleRecord> records;
    std::size_t dropped = 0;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        line = strip_cr(line);
        if (line.empty() && in.eof()) break; // trailing newline
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw DataError("csv row " + std::to_string(row) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        auto cell = [&](std::size_t k) -> const std::string& { return fields[col_pos[k]]; };
        auto bad = [row](const std::string& col, const std::string& value) -> DataError {
            return DataError("csv row " + std::to_string(row) + ": malformed " + col + " '" +
                             value + "'");
        };
        auto opt_num = [&](std::size_t k) -> std::optional<double> {
            const std::string& s = cell(k);
            if (s.empty()) return std::nullopt;
            const auto v = parse_double(s);
            if (!v) throw bad(kColumns[k], s);
            return v;
        };

        // Empty target: row rejected, counted, ingestion continues.
        if (cell(12).empty()) {
            ++dropped;
            ++row;
            continue;
        }

        SampleRecord rec;
        try {
            rec.timestamp = parse_timestamp(cell(0));
        } catch (const DataError&) {
            throw bad("timestamp", cell(0));
        }
        const auto tech = parse_tech(cell(1));
        if (!tech) throw bad("tech", cell(1));
        rec.tech = *tech;
        if (cell(2).empty()) throw bad("carrier", cell(2));
        rec.carrier = cell(2);
        if (cell(3).empty()) throw bad("band", cell(3));
        rec.band = cell(3);
        rec.rsrp = opt_num(4);
        rec.rsrq = opt_num(5);
        rec.sinr = opt_num(6);
        rec.timing_advance = opt_num(7);
        rec.latency_ms = opt_num(8);
        rec.jitter_ms = opt_num(9);
        rec.ttfb_ms = opt_num(10);
        rec.packet_loss = opt_num(11);
        const auto target = parse_double(cell(12));
        if (!target) throw bad("dl_throughput_kbps", cell(12));
        rec.throughput_kbps = *target;

        validate_record(rec, row);
        records.push_back(std::move(rec));
        ++row;
    }

    return {build_dataset(records, frozen, tz_offset_seconds), dropped};
}

IngestResult ingest_csv_file(const std::string& path, const Encoders* frozen,
                             std::int64_t tz_offset_seconds) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    return ingest_csv(in, frozen, tz_offset_seconds);
}

void write_csv(std::ostream& out, const std::vector<SampleRecord>& records) {
    for (std::size_t k = 0; k < kColumns.size(); ++k) {
        if (k) out << ',';
        out << kColumns[k];
    }
    out << '\n';
    auto opt_cell = [&out](const std::optional<double>& v) {
        if (v) out << fmt_double(*v);
    };
    for (const SampleRecord& rec : records) {
        out << rec.timestamp << ',' << tech_label(rec.tech) << ',' << rec.carrier << ','
            << rec.band << ',';
        opt_cell(rec.rsrp);
        out << ',';
        opt_cell(rec.rsrq);
        out << ',';
        opt_cell(rec.sinr);
        out << ',';
        opt_cell(rec.timing_advance);
        out << ',';
        opt_cell(rec.latency_ms);
        out << ',';
        opt_cell(rec.jitter_ms);
        out << ',';
        opt_cell(rec.ttfb_ms);
        out << ',';
        opt_cell(rec.packet_loss);
        out << ',' << fmt_double(rec.throughput_kbps) << '\n';
    }
}

void write_csv_file(const std::string& path, const std::vector<SampleRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    write_csv(out, records);
    out.flush();
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<SampleRecord> records_from_dataset(const Dataset& ds) {
    std::vector<SampleRecord> records(ds.n_rows());
    auto label_of = [](const Encoder& enc, double code, const char* what) -> std::string {
        const auto idx = static_cast<std::size_t>(code);
        if (idx >= enc.labels.size()) {
            throw DataError(std::string("cannot decode ") + what +
                            " code " + std::to_string(idx) + " (unseen category)");
        }
        return enc.labels[idx];
    };
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        SampleRecord& rec = records[i];
        rec.timestamp = ds.timestamps[i];
        const auto tech = parse_tech(label_of(ds.encoders.tech, ds.features.at(i, feat::tech), "tech"));
        if (!tech) throw DataError("invalid tech label in encoder");
        rec.tech = *tech;
        rec.carrier = label_of(ds.encoders.carrier, ds.features.at(i, feat::carrier), "carrier");
        rec.band = label_of(ds.encoders.band, ds.features.at(i, feat::band), "band");
        auto opt_of = [&](std::size_t col) -> std::optional<double> {
            if (ds.features.is_missing(i, col)) return std::nullopt;
            return ds.features.at(i, col);
        };
        rec.rsrp = opt_of(feat::rsrp);
        rec.rsrq = opt_of(feat::rsrq);
        rec.sinr = opt_of(feat::sinr);
        rec.timing_advance = opt_of(feat::timing_advance);
        rec.latency_ms = opt_of(feat::latency_ms);
        rec.jitter_ms = opt_of(feat::jitter_ms);
        rec.ttfb_ms = opt_of(feat::ttfb_ms);
        rec.packet_loss = opt_of(feat::packet_loss);
        rec.throughput_kbps = ds.target_kbps[i];
    }
    return records;
}

} // namespace dlcast
