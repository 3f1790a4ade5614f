#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ibrkit/csv.hpp"
#include "ibrkit/record.hpp"

namespace ibrkit {

// Canonical column set of the connection-record export format, plus the
// optional TcpFlags extension column.
struct CsvSchema {
    static const std::vector<std::string>& table_columns();     // without TcpFlags
    static const std::vector<std::string>& corpus_columns();    // with TcpFlags
    static const std::vector<std::string>& critical_columns();  // SourceIP, Port, Packets
};

struct CleaningReport {
    uint64_t rows_read = 0;
    uint64_t rows_retained = 0;
    std::map<RejectReason, uint64_t> rejected_by_reason;

    uint64_t rejected_total() const;
    // rows_read == rows_retained + rejected; asserted on every run.
    bool conserves() const { return rows_read == rows_retained + rejected_total(); }

    bool operator==(const CleaningReport&) const = default;
};

// Lazy raw-row stream: header handling plus RFC 4180 row parsing. Rows that
// cannot be split cleanly are still yielded, marked malformed, so the caller
// can count them.
class RawCsvStream {
public:
    // Throws Error(input_format) when the header is missing one of the
    // critical columns.
    RawCsvStream(std::istream& in, size_t chunk_size = 64 * 1024);

    std::optional<RawRecord> next();

    const std::vector<std::string>& header() const { return *columns_; }
    const Fnv1a64& digest() const { return reader_.digest(); }

private:
    CsvReader reader_;
    std::shared_ptr<const std::vector<std::string>> columns_;
};

struct IngestOptions {
    size_t chunk_size = 64 * 1024;
    // When set, rejected rows are spooled there in the input format plus a
    // trailing RejectReason column.
    std::string rejects_path;
};

// Composes the raw stream with validation. Pull one retained record at a
// time; rejections are tallied (and optionally spooled) internally, so the
// whole file never needs to be materialized.
class RecordReader {
public:
    RecordReader(std::istream& in, const IngestOptions& options = {});
    ~RecordReader();

    std::optional<ConnectionRecord> next();

    // Also exposes the retained row's 0-based index among retained records.
    std::optional<std::pair<ConnectionRecord, uint64_t>> next_indexed();

    const CleaningReport& report() const { return report_; }
    std::string digest_hex() const { return stream_.digest().hex(); }
    TimestampFormat timestamp_format() const { return ctx_.timestamp_format; }

private:
    RawCsvStream stream_;
    ValidationContext ctx_;
    CleaningReport report_;
    uint64_t retained_index_ = 0;
    std::unique_ptr<std::ofstream> rejects_;

    void spool_reject(const RawRecord& raw, RejectReason reason);
};

// Whole-file convenience form of the above.
std::pair<std::vector<ConnectionRecord>, CleaningReport> ingest_file(
    const std::string& path, const IngestOptions& options = {});

// Serializes a record as one corpus CSV row (column order per
// CsvSchema::corpus_columns). Unknown markers round-trip: re-validating an
// emitted row yields an equal record.
std::vector<std::string> record_to_row(const ConnectionRecord& record);
void write_corpus_header(std::ostream& out);
void write_corpus_record(std::ostream& out, const ConnectionRecord& record);

std::string format_double(double value);  // shortest round-trip form

}  // namespace ibrkit
