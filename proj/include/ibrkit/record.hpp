#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "ibrkit/ipv4.hpp"

namespace ibrkit {

// Marker values for fields absent in input. Unknowns participate in
// aggregations as their own category; they are never dropped or guessed.
inline constexpr std::string_view kUnknownCountry = "??";
inline constexpr uint32_t kUnknownAsn = 0;

// TCP flag set over the six classic flags. ECN letters (E, C, W) occasionally
// appear in exports; they are accepted on input and dropped, so "SAE" parses
// as SYN+ACK.
struct TcpFlags {
    enum : uint8_t { kSyn = 1, kAck = 2, kRst = 4, kFin = 8, kPsh = 16, kUrg = 32 };

    uint8_t bits = 0;

    bool has(uint8_t flag) const { return (bits & flag) != 0; }
    auto operator<=>(const TcpFlags&) const = default;
};

std::optional<TcpFlags> parse_tcp_flags(std::string_view text);
std::string format_tcp_flags(TcpFlags flags);

// One aggregated darknet flow summary. Immutable by convention after
// validation; all analysis treats records as values.
struct ConnectionRecord {
    Ipv4 source_ip;
    uint16_t port = 0;
    std::string traffic;  // opaque passthrough label, e.g. "tcp"
    int64_t first = 0;    // epoch seconds UTC
    int64_t last = 0;
    uint64_t packets = 0;
    uint64_t bytes = 0;
    uint64_t unique_dests = 0;
    uint64_t unique_dest24s = 0;
    std::optional<double> lat;
    std::optional<double> lon;
    std::string country{kUnknownCountry};
    std::string city;
    uint32_t asn = kUnknownAsn;
    std::string org;
    std::string prefix;
    std::string rdns;
    bool zmap = false;
    bool masscan = false;
    bool mirai = false;
    uint64_t samples = 0;  // opaque passthrough count
    bool tcp = false;
    bool icmp = false;
    std::optional<TcpFlags> tcp_flags;

    enum class Protocol { tcp, icmp, other };

    // TCP wins when both indicator booleans are set.
    Protocol protocol() const {
        if (tcp) return Protocol::tcp;
        if (icmp) return Protocol::icmp;
        return Protocol::other;
    }

    bool operator==(const ConnectionRecord&) const = default;
};

enum class RejectReason {
    null_critical_field,
    zero_packets,
    invalid_port,
    malformed_field,
};

std::string_view to_string(RejectReason reason);

// A raw CSV row addressed by header name. The header is shared between all
// rows of one file.
class RawRecord {
public:
    RawRecord() = default;
    RawRecord(std::shared_ptr<const std::vector<std::string>> columns,
              std::vector<std::string> values)
        : columns_(std::move(columns)), values_(std::move(values)) {}

    // Marks a row the CSV layer could not split into fields (bad quoting,
    // wrong field count). Such rows always validate to malformed_field.
    void mark_malformed(std::string why) { csv_error_ = std::move(why); }
    bool malformed() const { return !csv_error_.empty(); }
    const std::string& csv_error() const { return csv_error_; }

    // Returns the raw text of a column, or nullopt when the column is not in
    // the header at all.
    std::optional<std::string_view> get(std::string_view column) const;

    const std::vector<std::string>& values() const { return values_; }
    const std::vector<std::string>& columns() const;

private:
    std::shared_ptr<const std::vector<std::string>> columns_;
    std::vector<std::string> values_;
    std::string csv_error_;
};

// Whether a raw field value stands for "no value". Matches pandas-style CSV
// exports: empty string, NULL/null, NaN/nan.
bool is_null_token(std::string_view text);

// Timestamp convention of one input file: epoch seconds or ISO-8601, detected
// from the first parsed value and then enforced, never mixed.
enum class TimestampFormat { unset, epoch_seconds, iso8601 };

struct ValidationContext {
    TimestampFormat timestamp_format = TimestampFormat::unset;
};

struct ValidationResult {
    std::optional<ConnectionRecord> record;
    RejectReason reason = RejectReason::malformed_field;
    std::string detail;

    bool ok() const { return record.has_value(); }
};

// Validates one raw row into a ConnectionRecord or exactly one rejection
// reason. Critical fields (SourceIP, Port, Packets) are never repaired;
// absent optional fields become explicit unknown markers.
ValidationResult validate_record(const RawRecord& raw, ValidationContext& ctx);
ValidationResult validate_record(const RawRecord& raw);

struct DatasetSummary {
    uint64_t record_count = 0;
    uint64_t total_packets = 0;
    uint64_t total_bytes = 0;
    uint64_t unique_source_ips = 0;
    uint64_t unique_ports = 0;
    uint64_t unique_asns = 0;
    int64_t time_span_first = 0;  // both zero when record_count == 0
    int64_t time_span_last = 0;

    bool operator==(const DatasetSummary&) const = default;
};

// Order-insensitive incremental form of summarize(); partial accumulators
// merge commutatively and associatively.
class SummaryAccumulator {
public:
    void add(const ConnectionRecord& record);
    void merge(const SummaryAccumulator& other);
    DatasetSummary finalize() const;

private:
    uint64_t record_count_ = 0;
    uint64_t total_packets_ = 0;
    uint64_t total_bytes_ = 0;
    std::unordered_set<uint32_t> ips_;
    std::unordered_set<uint16_t> ports_;
    std::unordered_set<uint32_t> asns_;
    int64_t min_first_ = 0;
    int64_t max_last_ = 0;
};

DatasetSummary summarize(const std::vector<ConnectionRecord>& records);

// Parses ISO-8601 "YYYY-MM-DD[T ]HH:MM:SS[Z]" to epoch seconds UTC.
std::optional<int64_t> parse_iso8601_utc(std::string_view text);

}  // namespace ibrkit
