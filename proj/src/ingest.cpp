#include "ibrkit/ingest.hpp"

#include <algorithm>
#include <charconv>

#include "ibrkit/errors.hpp"

namespace ibrkit {

const std::vector<std::string>& CsvSchema::table_columns() {
    static const std::vector<std::string> columns = {
        "SourceIP", "Port", "Traffic", "First", "Last", "Packets", "Bytes",
        "UniqueDests", "UniqueDest24s", "Lat", "Long", "Country", "City",
        "ASN", "Org", "Prefix", "RDNS", "Zmap", "Masscan", "Mirai",
        "Samples", "TCP", "ICMP"};
    return columns;
}

const std::vector<std::string>& CsvSchema::corpus_columns() {
    static const std::vector<std::string> columns = [] {
        auto cols = table_columns();
        cols.push_back("TcpFlags");
        return cols;
    }();
    return columns;
}

const std::vector<std::string>& CsvSchema::critical_columns() {
    static const std::vector<std::string> columns = {"SourceIP", "Port", "Packets"};
    return columns;
}

uint64_t CleaningReport::rejected_total() const {
    uint64_t total = 0;
    for (const auto& [reason, count] : rejected_by_reason) total += count;
    return total;
}

RawCsvStream::RawCsvStream(std::istream& in, size_t chunk_size) : reader_(in, chunk_size) {
    std::vector<std::string> header;
    std::string error;
    auto status = reader_.next_row(header, error);
    if (status != CsvReader::RowStatus::ok) {
        throw input_error("missing_critical_column: empty input, no header row");
    }
    for (const auto& critical : CsvSchema::critical_columns()) {
        if (std::find(header.begin(), header.end(), critical) == header.end()) {
            throw input_error("missing_critical_column: " + critical);
        }
    }
    columns_ = std::make_shared<const std::vector<std::string>>(std::move(header));
}

std::optional<RawRecord> RawCsvStream::next() {
    std::vector<std::string> fields;
    std::string error;
    auto status = reader_.next_row(fields, error);
    if (status == CsvReader::RowStatus::end) return std::nullopt;
    RawRecord raw(columns_, std::move(fields));
    if (status == CsvReader::RowStatus::malformed) {
        raw.mark_malformed(error);
    } else if (raw.values().size() != columns_->size()) {
        raw.mark_malformed("expected " + std::to_string(columns_->size()) + " fields, got " +
                           std::to_string(raw.values().size()));
    }
    return raw;
}

RecordReader::RecordReader(std::istream& in, const IngestOptions& options)
    : stream_(in, options.chunk_size) {
    if (!options.rejects_path.empty()) {
        rejects_ = std::make_unique<std::ofstream>(options.rejects_path, std::ios::binary);
        if (!*rejects_) throw io_error("cannot open rejects file: " + options.rejects_path);
        auto header = stream_.header();
        header.push_back("RejectReason");
        write_csv_row(*rejects_, header);
    }
}

RecordReader::~RecordReader() = default;

void RecordReader::spool_reject(const RawRecord& raw, RejectReason reason) {
    if (!rejects_) return;
    auto fields = raw.values();
    fields.resize(stream_.header().size());  // pad/truncate malformed rows
    fields.emplace_back(to_string(reason));
    write_csv_row(*rejects_, fields);
}

std::optional<ConnectionRecord> RecordReader::next() {
    auto indexed = next_indexed();
    if (!indexed) return std::nullopt;
    return std::move(indexed->first);
}

std::optional<std::pair<ConnectionRecord, uint64_t>> RecordReader::next_indexed() {
    for (;;) {
        auto raw = stream_.next();
        if (!raw) return std::nullopt;
        ++report_.rows_read;
        auto result = validate_record(*raw, ctx_);
        if (result.ok()) {
            ++report_.rows_retained;
            return std::make_pair(std::move(*result.record), retained_index_++);
        }
        ++report_.rejected_by_reason[result.reason];
        spool_reject(*raw, result.reason);
    }
}

std::pair<std::vector<ConnectionRecord>, CleaningReport> ingest_file(
    const std::string& path, const IngestOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open input file: " + path);
    RecordReader reader(in, options);
    std::vector<ConnectionRecord> records;
    while (auto record = reader.next()) {
        records.push_back(std::move(*record));
    }
    return {std::move(records), reader.report()};
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, ptr);
}

std::vector<std::string> record_to_row(const ConnectionRecord& r) {
    auto opt_double = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string{};
    };
    return {
        format_ipv4(r.source_ip),
        std::to_string(r.port),
        r.traffic,
        std::to_string(r.first),
        std::to_string(r.last),
        std::to_string(r.packets),
        std::to_string(r.bytes),
        std::to_string(r.unique_dests),
        std::to_string(r.unique_dest24s),
        opt_double(r.lat),
        opt_double(r.lon),
        r.country,
        r.city,
        std::to_string(r.asn),
        r.org,
        r.prefix,
        r.rdns,
        r.zmap ? "1" : "0",
        r.masscan ? "1" : "0",
        r.mirai ? "1" : "0",
        std::to_string(r.samples),
        r.tcp ? "1" : "0",
        r.icmp ? "1" : "0",
        r.tcp_flags ? format_tcp_flags(*r.tcp_flags) : std::string{},
    };
}

void write_corpus_header(std::ostream& out) {
    write_csv_row(out, CsvSchema::corpus_columns());
}

void write_corpus_record(std::ostream& out, const ConnectionRecord& record) {
    write_csv_row(out, record_to_row(record));
}

}  // namespace ibrkit
