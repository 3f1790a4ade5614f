#include <doctest.h>

#include <algorithm>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "ibrkit/record.hpp"

using namespace ibrkit;

namespace {

RawRecord make_raw(std::vector<std::string> columns, std::vector<std::string> values) {
    auto cols = std::make_shared<const std::vector<std::string>>(std::move(columns));
    return RawRecord(cols, std::move(values));
}

// Minimal critical-only row; override individual values per test.
RawRecord critical_row(std::string ip, std::string port, std::string packets) {
    return make_raw({"SourceIP", "Port", "Packets"},
                    {std::move(ip), std::move(port), std::move(packets)});
}

ConnectionRecord rec(uint32_t ip, uint16_t port, uint64_t packets) {
    ConnectionRecord r;
    r.source_ip = Ipv4{ip};
    r.port = port;
    r.packets = packets;
    return r;
}

}  // namespace

TEST_CASE("zero packets are rejected") {
    auto result = validate_record(critical_row("1.2.3.4", "23", "0"));
    REQUIRE_FALSE(result.ok());
    CHECK(result.reason == RejectReason::zero_packets);
}

TEST_CASE("out-of-range port is rejected") {
    auto result = validate_record(critical_row("1.2.3.4", "70000", "10"));
    REQUIRE_FALSE(result.ok());
    CHECK(result.reason == RejectReason::invalid_port);

    CHECK(validate_record(critical_row("1.2.3.4", "0", "10")).reason ==
          RejectReason::invalid_port);
    CHECK(validate_record(critical_row("1.2.3.4", "-1", "10")).reason ==
          RejectReason::invalid_port);
    CHECK(validate_record(critical_row("1.2.3.4", "65535", "10")).ok());
    CHECK(validate_record(critical_row("1.2.3.4", "1", "10")).ok());
}

TEST_CASE("null critical fields are rejected") {
    for (const char* null_token : {"", "NULL", "null", "NaN", "nan"}) {
        auto result = validate_record(critical_row(null_token, "23", "10"));
        REQUIRE_FALSE(result.ok());
        CHECK(result.reason == RejectReason::null_critical_field);
    }
    CHECK(validate_record(critical_row("1.2.3.4", "NULL", "10")).reason ==
          RejectReason::null_critical_field);
    CHECK(validate_record(critical_row("1.2.3.4", "23", "")).reason ==
          RejectReason::null_critical_field);
}

TEST_CASE("unparsable fields are rejected as malformed") {
    CHECK(validate_record(critical_row("1.2.3.4", "23", "ten")).reason ==
          RejectReason::malformed_field);
    CHECK(validate_record(critical_row("999.2.3.4", "23", "10")).reason ==
          RejectReason::malformed_field);
    CHECK(validate_record(critical_row("1.2.3", "23", "10")).reason ==
          RejectReason::malformed_field);
    CHECK(validate_record(critical_row("1.2.3.4", "23", "-5")).reason ==
          RejectReason::malformed_field);
    CHECK(validate_record(critical_row("1.2.3.4", "6553500", "10")).reason ==
          RejectReason::invalid_port);
}

TEST_CASE("rejection reasons have fixed precedence") {
    // null critical beats everything else in the same row
    auto r1 = validate_record(critical_row("", "70000", "0"));
    CHECK(r1.reason == RejectReason::null_critical_field);

    // malformed beats the value checks
    auto r2 = validate_record(critical_row("not-an-ip", "70000", "0"));
    CHECK(r2.reason == RejectReason::malformed_field);

    // zero packets beats invalid port
    auto r3 = validate_record(critical_row("1.2.3.4", "70000", "0"));
    CHECK(r3.reason == RejectReason::zero_packets);

    // a malformed optional field rejects the row even when criticals are fine
    auto r4 = validate_record(make_raw({"SourceIP", "Port", "Packets", "Lat"},
                                       {"1.2.3.4", "23", "0", "north"}));
    CHECK(r4.reason == RejectReason::malformed_field);
}

TEST_CASE("csv-level malformed rows validate to malformed_field") {
    auto raw = critical_row("1.2.3.4", "23", "10");
    raw.mark_malformed("unterminated quote");
    auto result = validate_record(raw);
    REQUIRE_FALSE(result.ok());
    CHECK(result.reason == RejectReason::malformed_field);
}

TEST_CASE("fully populated row is accepted with identical values") {
    auto raw = make_raw(
        {"SourceIP", "Port", "Traffic", "First", "Last", "Packets", "Bytes",
         "UniqueDests", "UniqueDest24s", "Lat", "Long", "Country", "City", "ASN",
         "Org", "Prefix", "RDNS", "Zmap", "Masscan", "Mirai", "Samples", "TCP",
         "ICMP", "TcpFlags"},
        {"89.248.165.52", "23", "tcp", "1736380800", "1736433005", "1500", "90000",
         "250", "120", "52.37", "4.89", "NL", "Amsterdam", "202425", "IP Volume inc",
         "89.248.160.0/21", "none", "0", "1", "0", "37", "1", "0", "S"});
    auto result = validate_record(raw);
    REQUIRE(result.ok());
    const auto& r = *result.record;
    CHECK(format_ipv4(r.source_ip) == "89.248.165.52");
    CHECK(r.port == 23);
    CHECK(r.traffic == "tcp");
    CHECK(r.first == 1736380800);
    CHECK(r.last == 1736433005);
    CHECK(r.packets == 1500);
    CHECK(r.bytes == 90000);
    CHECK(r.unique_dests == 250);
    CHECK(r.unique_dest24s == 120);
    CHECK(r.lat == doctest::Approx(52.37));
    CHECK(r.lon == doctest::Approx(4.89));
    CHECK(r.country == "NL");
    CHECK(r.city == "Amsterdam");
    CHECK(r.asn == 202425);
    CHECK(r.org == "IP Volume inc");
    CHECK(r.prefix == "89.248.160.0/21");
    CHECK(r.rdns == "none");
    CHECK_FALSE(r.zmap);
    CHECK(r.masscan);
    CHECK_FALSE(r.mirai);
    CHECK(r.samples == 37);
    CHECK(r.tcp);
    CHECK_FALSE(r.icmp);
    REQUIRE(r.tcp_flags.has_value());
    CHECK(r.tcp_flags->bits == TcpFlags::kSyn);
    CHECK(r.protocol() == ConnectionRecord::Protocol::tcp);
}

TEST_CASE("absent optional fields become unknown markers") {
    auto result = validate_record(critical_row("1.2.3.4", "23", "10"));
    REQUIRE(result.ok());
    const auto& r = *result.record;
    CHECK(r.country == kUnknownCountry);
    CHECK(r.asn == kUnknownAsn);
    CHECK(r.org.empty());
    CHECK_FALSE(r.lat.has_value());
    CHECK_FALSE(r.tcp_flags.has_value());
    CHECK(r.first == 0);
    CHECK(r.last == 0);
}

TEST_CASE("booleans accept 0/1/true/false in any case") {
    auto check_bool = [](const std::string& text, bool expect) {
        auto raw = make_raw({"SourceIP", "Port", "Packets", "Zmap"},
                            {"1.2.3.4", "23", "10", text});
        auto result = validate_record(raw);
        REQUIRE(result.ok());
        CHECK(result.record->zmap == expect);
    };
    check_bool("0", false);
    check_bool("1", true);
    check_bool("true", true);
    check_bool("TRUE", true);
    check_bool("False", false);

    auto bad = validate_record(
        make_raw({"SourceIP", "Port", "Packets", "Zmap"}, {"1.2.3.4", "23", "10", "2"}));
    CHECK(bad.reason == RejectReason::malformed_field);
}

TEST_CASE("timestamps accept epoch or iso8601, never mixed per file") {
    ValidationContext ctx;
    auto epoch_row = make_raw({"SourceIP", "Port", "Packets", "First", "Last"},
                              {"1.2.3.4", "23", "10", "1736380800", "1736380860"});
    auto r1 = validate_record(epoch_row, ctx);
    REQUIRE(r1.ok());
    CHECK(r1.record->first == 1736380800);
    CHECK(ctx.timestamp_format == TimestampFormat::epoch_seconds);

    auto iso_row = make_raw({"SourceIP", "Port", "Packets", "First", "Last"},
                            {"1.2.3.4", "23", "10", "2025-01-09 14:30:05",
                             "2025-01-09 15:00:00"});
    auto r2 = validate_record(iso_row, ctx);  // format already locked to epoch
    CHECK(r2.reason == RejectReason::malformed_field);

    ValidationContext iso_ctx;
    auto r3 = validate_record(iso_row, iso_ctx);
    REQUIRE(r3.ok());
    CHECK(r3.record->first == 1736433005);
    CHECK(iso_ctx.timestamp_format == TimestampFormat::iso8601);
}

TEST_CASE("iso8601 parser handles T separator and Z suffix") {
    CHECK(parse_iso8601_utc("1970-01-01 00:00:00") == 0);
    CHECK(parse_iso8601_utc("2025-01-09T00:00:00Z") == 1736380800);
    CHECK(parse_iso8601_utc("2000-02-29 12:00:00") == 951825600);
    CHECK_FALSE(parse_iso8601_utc("2025-02-30 00:00:00").has_value());
    CHECK_FALSE(parse_iso8601_utc("2025-01-09").has_value());
    CHECK_FALSE(parse_iso8601_utc("garbage").has_value());
}

TEST_CASE("first/last ordering and single-sided absence") {
    auto swapped = make_raw({"SourceIP", "Port", "Packets", "First", "Last"},
                            {"1.2.3.4", "23", "10", "200", "100"});
    CHECK(validate_record(swapped).reason == RejectReason::malformed_field);

    auto only_first = make_raw({"SourceIP", "Port", "Packets", "First"},
                               {"1.2.3.4", "23", "10", "500"});
    auto r = validate_record(only_first);
    REQUIRE(r.ok());
    CHECK(r.record->first == 500);
    CHECK(r.record->last == 500);
}

TEST_CASE("dest24 count cannot exceed dest count") {
    auto bad = make_raw({"SourceIP", "Port", "Packets", "UniqueDests", "UniqueDest24s"},
                        {"1.2.3.4", "23", "10", "5", "9"});
    CHECK(validate_record(bad).reason == RejectReason::malformed_field);

    // when the /24 count is the only one present it also bounds the dest count
    auto repaired = make_raw({"SourceIP", "Port", "Packets", "UniqueDest24s"},
                             {"1.2.3.4", "23", "10", "9"});
    auto r = validate_record(repaired);
    REQUIRE(r.ok());
    CHECK(r.record->unique_dests == 9);
    CHECK(r.record->unique_dest24s == 9);
}

TEST_CASE("tcp flag strings parse and format canonically") {
    auto flags = parse_tcp_flags("AS");
    REQUIRE(flags.has_value());
    CHECK(flags->has(TcpFlags::kSyn));
    CHECK(flags->has(TcpFlags::kAck));
    CHECK(format_tcp_flags(*flags) == "SA");

    // ECN letters are tolerated and dropped
    auto ecn = parse_tcp_flags("SAE");
    REQUIRE(ecn.has_value());
    CHECK(format_tcp_flags(*ecn) == "SA");

    CHECK(format_tcp_flags(*parse_tcp_flags("UPFRAS")) == "SARFPU");
    CHECK_FALSE(parse_tcp_flags("SAX").has_value());
}

TEST_CASE("summarize counts distinct keys and spans") {
    std::vector<ConnectionRecord> records = {rec(0x01020304, 23, 5),
                                             rec(0x01020304, 23, 5),
                                             rec(0x05060708, 80, 10)};
    records[0].first = 100;
    records[0].last = 200;
    records[1].first = 50;
    records[1].last = 60;
    records[2].first = 150;
    records[2].last = 400;
    auto summary = summarize(records);
    CHECK(summary.record_count == 3);
    CHECK(summary.total_packets == 20);
    CHECK(summary.unique_source_ips == 2);
    CHECK(summary.unique_ports == 2);
    CHECK(summary.unique_asns == 1);  // all unknown asn 0
    CHECK(summary.time_span_first == 50);
    CHECK(summary.time_span_last == 400);

    auto shuffled = records;
    std::mt19937 rng(7);
    for (int i = 0; i < 5; ++i) {
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        CHECK(summarize(shuffled) == summary);
    }
}

TEST_CASE("summarize of empty input is all zeros") {
    CHECK(summarize({}) == DatasetSummary{});
}

TEST_CASE("summary accumulators merge like a single pass") {
    std::vector<ConnectionRecord> records;
    for (uint32_t i = 0; i < 100; ++i) {
        auto r = rec(0x0a000000 + i % 7, static_cast<uint16_t>(1 + i % 11), 1 + i);
        r.first = 1000 + i;
        r.last = 2000 + i;
        r.asn = i % 3;
        records.push_back(r);
    }
    SummaryAccumulator whole;
    for (const auto& r : records) whole.add(r);

    SummaryAccumulator left, right;
    for (size_t i = 0; i < records.size(); ++i) {
        (i % 2 ? left : right).add(records[i]);
    }
    SummaryAccumulator merged;
    merged.merge(left);
    merged.merge(right);
    CHECK(merged.finalize() == whole.finalize());
}
