#include "ibrkit/record.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace ibrkit {

namespace {

const std::vector<std::string> kEmptyColumns;

std::optional<uint64_t> parse_u64(std::string_view text) {
    uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<int64_t> parse_i64(std::string_view text) {
    int64_t value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    return value;
}

std::optional<double> parse_double(std::string_view text) {
    double value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
    if (!std::isfinite(value)) return std::nullopt;
    return value;
}

// Accepts 0/1 and any case variant of true/false; exporters disagree on
// capitalization.
std::optional<bool> parse_bool(std::string_view text) {
    if (text == "0") return false;
    if (text == "1") return true;
    std::string lower;
    lower.reserve(text.size());
    for (char c : text) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "true") return true;
    if (lower == "false") return false;
    return std::nullopt;
}

bool looks_like_integer(std::string_view text) {
    if (text.empty()) return false;
    size_t start = (text[0] == '-' || text[0] == '+') ? 1 : 0;
    if (start == text.size()) return false;
    return std::all_of(text.begin() + static_cast<long>(start), text.end(),
                       [](char c) { return c >= '0' && c <= '9'; });
}

// Parses First/Last under the per-file timestamp convention, locking the
// convention on first use.
std::optional<int64_t> parse_timestamp(std::string_view text, ValidationContext& ctx) {
    bool integer = looks_like_integer(text);
    TimestampFormat seen = integer ? TimestampFormat::epoch_seconds : TimestampFormat::iso8601;
    if (ctx.timestamp_format == TimestampFormat::unset) {
        ctx.timestamp_format = seen;
    } else if (ctx.timestamp_format != seen) {
        return std::nullopt;  // mixed conventions in one file
    }
    if (integer) return parse_i64(text);
    return parse_iso8601_utc(text);
}

ValidationResult reject(RejectReason reason, std::string detail) {
    ValidationResult result;
    result.reason = reason;
    result.detail = std::move(detail);
    return result;
}

}  // namespace

std::optional<TcpFlags> parse_tcp_flags(std::string_view text) {
    TcpFlags flags;
    for (char c : text) {
        switch (std::toupper(static_cast<unsigned char>(c))) {
            case 'S': flags.bits |= TcpFlags::kSyn; break;
            case 'A': flags.bits |= TcpFlags::kAck; break;
            case 'R': flags.bits |= TcpFlags::kRst; break;
            case 'F': flags.bits |= TcpFlags::kFin; break;
            case 'P': flags.bits |= TcpFlags::kPsh; break;
            case 'U': flags.bits |= TcpFlags::kUrg; break;
            case 'E': case 'C': case 'W': break;  // ECN bits, dropped
            default: return std::nullopt;
        }
    }
    return flags;
}

std::string format_tcp_flags(TcpFlags flags) {
    std::string out;
    if (flags.has(TcpFlags::kSyn)) out.push_back('S');
    if (flags.has(TcpFlags::kAck)) out.push_back('A');
    if (flags.has(TcpFlags::kRst)) out.push_back('R');
    if (flags.has(TcpFlags::kFin)) out.push_back('F');
    if (flags.has(TcpFlags::kPsh)) out.push_back('P');
    if (flags.has(TcpFlags::kUrg)) out.push_back('U');
    return out;
}

std::string_view to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::null_critical_field: return "null_critical_field";
        case RejectReason::zero_packets: return "zero_packets";
        case RejectReason::invalid_port: return "invalid_port";
        case RejectReason::malformed_field: return "malformed_field";
    }
    return "unknown";
}

std::optional<std::string_view> RawRecord::get(std::string_view column) const {
    if (!columns_) return std::nullopt;
    for (size_t i = 0; i < columns_->size(); ++i) {
        if ((*columns_)[i] == column) {
            if (i >= values_.size()) return std::string_view{};
            return std::string_view{values_[i]};
        }
    }
    return std::nullopt;
}

const std::vector<std::string>& RawRecord::columns() const {
    return columns_ ? *columns_ : kEmptyColumns;
}

bool is_null_token(std::string_view text) {
    return text.empty() || text == "NULL" || text == "null" || text == "NaN" || text == "nan";
}

std::optional<int64_t> parse_iso8601_utc(std::string_view text) {
    // YYYY-MM-DD[T ]HH:MM:SS with optional trailing Z.
    if (!text.empty() && (text.back() == 'Z' || text.back() == 'z')) {
        text.remove_suffix(1);
    }
    if (text.size() != 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    auto field = [&](size_t pos, size_t len) -> std::optional<int64_t> {
        auto v = parse_i64(text.substr(pos, len));
        return v;
    };
    auto year = field(0, 4), month = field(5, 2), day = field(8, 2);
    auto hour = field(11, 2), minute = field(14, 2), second = field(17, 2);
    if (!year || !month || !day || !hour || !minute || !second) return std::nullopt;
    if (*month < 1 || *month > 12 || *day < 1) return std::nullopt;
    bool leap = *year % 4 == 0 && (*year % 100 != 0 || *year % 400 == 0);
    static constexpr int kMonthDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    int days_in_month = kMonthDays[*month - 1] + (leap && *month == 2 ? 1 : 0);
    if (*day > days_in_month) return std::nullopt;
    if (*hour > 23 || *minute > 59 || *second > 60) return std::nullopt;

    // Days-from-civil (Howard Hinnant's algorithm); avoids timegm and locale.
    int64_t y = *year;
    int64_t m = *month;
    int64_t d = *day;
    y -= m <= 2;
    int64_t era = (y >= 0 ? y : y - 399) / 400;
    uint64_t yoe = static_cast<uint64_t>(y - era * 400);
    uint64_t doy = static_cast<uint64_t>((153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1);
    uint64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    int64_t days = era * 146097 + static_cast<int64_t>(doe) - 719468;
    return days * 86400 + *hour * 3600 + *minute * 60 + *second;
}

ValidationResult validate_record(const RawRecord& raw) {
    ValidationContext ctx;
    return validate_record(raw, ctx);
}

ValidationResult validate_record(const RawRecord& raw, ValidationContext& ctx) {
    if (raw.malformed()) {
        return reject(RejectReason::malformed_field, raw.csv_error());
    }

    auto present = [&](std::string_view column) -> std::optional<std::string_view> {
        auto value = raw.get(column);
        if (!value || is_null_token(*value)) return std::nullopt;
        return value;
    };

    // Critical fields first: a null there is its own rejection category and is
    // never repaired.
    auto ip_text = present("SourceIP");
    auto port_text = present("Port");
    auto packets_text = present("Packets");
    if (!ip_text || !port_text || !packets_text) {
        std::string which = !ip_text ? "SourceIP" : (!port_text ? "Port" : "Packets");
        return reject(RejectReason::null_critical_field, which);
    }

    auto ip = parse_ipv4(*ip_text);
    if (!ip) return reject(RejectReason::malformed_field, "SourceIP");
    auto port = parse_i64(*port_text);
    if (!port) return reject(RejectReason::malformed_field, "Port");
    auto packets = parse_u64(*packets_text);
    if (!packets) return reject(RejectReason::malformed_field, "Packets");

    ConnectionRecord rec;
    rec.source_ip = *ip;
    rec.packets = *packets;

    // Optional fields; a present-but-unparseable value is malformed even when
    // the row would otherwise be rejected for zero packets or a bad port, so
    // parse them before the range checks only where ordering matters. The
    // declared precedence is: null critical, malformed, zero packets, bad port.
    auto u64_field = [&](std::string_view column, uint64_t& out) -> bool {
        auto text = present(column);
        if (!text) return true;
        auto value = parse_u64(*text);
        if (!value) return false;
        out = *value;
        return true;
    };
    auto bool_field = [&](std::string_view column, bool& out) -> bool {
        auto text = present(column);
        if (!text) return true;
        auto value = parse_bool(*text);
        if (!value) return false;
        out = *value;
        return true;
    };
    auto string_field = [&](std::string_view column, std::string& out) {
        if (auto text = present(column)) out.assign(*text);
    };

    if (!u64_field("Bytes", rec.bytes)) return reject(RejectReason::malformed_field, "Bytes");
    if (!u64_field("UniqueDests", rec.unique_dests)) {
        return reject(RejectReason::malformed_field, "UniqueDests");
    }
    if (!u64_field("UniqueDest24s", rec.unique_dest24s)) {
        return reject(RejectReason::malformed_field, "UniqueDest24s");
    }
    if (!u64_field("Samples", rec.samples)) return reject(RejectReason::malformed_field, "Samples");

    bool have_first = false, have_last = false;
    if (auto text = present("First")) {
        auto value = parse_timestamp(*text, ctx);
        if (!value) return reject(RejectReason::malformed_field, "First");
        rec.first = *value;
        have_first = true;
    }
    if (auto text = present("Last")) {
        auto value = parse_timestamp(*text, ctx);
        if (!value) return reject(RejectReason::malformed_field, "Last");
        rec.last = *value;
        have_last = true;
    }
    if (have_first != have_last) {
        // One endpoint missing: collapse to the known one rather than invent a
        // duration. Both missing stays 0/0.
        if (have_first) rec.last = rec.first;
        else rec.first = rec.last;
    }
    if (rec.first > rec.last) return reject(RejectReason::malformed_field, "First>Last");

    if (auto text = present("Lat")) {
        auto value = parse_double(*text);
        if (!value) return reject(RejectReason::malformed_field, "Lat");
        rec.lat = *value;
    }
    if (auto text = present("Long")) {
        auto value = parse_double(*text);
        if (!value) return reject(RejectReason::malformed_field, "Long");
        rec.lon = *value;
    }
    if (auto text = present("ASN")) {
        auto value = parse_u64(*text);
        if (!value || *value > 0xffffffffull) return reject(RejectReason::malformed_field, "ASN");
        rec.asn = static_cast<uint32_t>(*value);
    }
    if (!bool_field("Zmap", rec.zmap)) return reject(RejectReason::malformed_field, "Zmap");
    if (!bool_field("Masscan", rec.masscan)) return reject(RejectReason::malformed_field, "Masscan");
    if (!bool_field("Mirai", rec.mirai)) return reject(RejectReason::malformed_field, "Mirai");
    if (!bool_field("TCP", rec.tcp)) return reject(RejectReason::malformed_field, "TCP");
    if (!bool_field("ICMP", rec.icmp)) return reject(RejectReason::malformed_field, "ICMP");
    if (auto text = present("TcpFlags")) {
        auto value = parse_tcp_flags(*text);
        if (!value) return reject(RejectReason::malformed_field, "TcpFlags");
        rec.tcp_flags = *value;
    }

    string_field("Traffic", rec.traffic);
    string_field("Country", rec.country);
    string_field("City", rec.city);
    string_field("Org", rec.org);
    string_field("Prefix", rec.prefix);
    string_field("RDNS", rec.rdns);

    if (rec.unique_dest24s > rec.unique_dests) {
        if (raw.get("UniqueDests") && !is_null_token(*raw.get("UniqueDests"))) {
            return reject(RejectReason::malformed_field, "UniqueDest24s>UniqueDests");
        }
        // Dests column absent entirely: weakest consistent repair.
        rec.unique_dests = rec.unique_dest24s;
    }

    if (rec.packets == 0) return reject(RejectReason::zero_packets, "Packets");
    if (*port < 1 || *port > 65535) return reject(RejectReason::invalid_port, "Port");
    rec.port = static_cast<uint16_t>(*port);

    ValidationResult result;
    result.record = std::move(rec);
    return result;
}

void SummaryAccumulator::add(const ConnectionRecord& record) {
    if (record_count_ == 0) {
        min_first_ = record.first;
        max_last_ = record.last;
    } else {
        min_first_ = std::min(min_first_, record.first);
        max_last_ = std::max(max_last_, record.last);
    }
    ++record_count_;
    total_packets_ += record.packets;
    total_bytes_ += record.bytes;
    ips_.insert(record.source_ip.value);
    ports_.insert(record.port);
    asns_.insert(record.asn);
}

void SummaryAccumulator::merge(const SummaryAccumulator& other) {
    if (other.record_count_ == 0) return;
    if (record_count_ == 0) {
        min_first_ = other.min_first_;
        max_last_ = other.max_last_;
    } else {
        min_first_ = std::min(min_first_, other.min_first_);
        max_last_ = std::max(max_last_, other.max_last_);
    }
    record_count_ += other.record_count_;
    total_packets_ += other.total_packets_;
    total_bytes_ += other.total_bytes_;
    ips_.insert(other.ips_.begin(), other.ips_.end());
    ports_.insert(other.ports_.begin(), other.ports_.end());
    asns_.insert(other.asns_.begin(), other.asns_.end());
}

DatasetSummary SummaryAccumulator::finalize() const {
    DatasetSummary summary;
    summary.record_count = record_count_;
    summary.total_packets = total_packets_;
    summary.total_bytes = total_bytes_;
    summary.unique_source_ips = ips_.size();
    summary.unique_ports = ports_.size();
    summary.unique_asns = asns_.size();
    summary.time_span_first = min_first_;
    summary.time_span_last = max_last_;
    return summary;
}

DatasetSummary summarize(const std::vector<ConnectionRecord>& records) {
    SummaryAccumulator acc;
    for (const auto& record : records) acc.add(record);
    return acc.finalize();
}

}  // namespace ibrkit
