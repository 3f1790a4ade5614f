#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ibrkit/detect.hpp"
#include "ibrkit/ingest.hpp"
#include "ibrkit/metrics.hpp"
#include "ibrkit/record.hpp"

namespace ibrkit {

// Curated port risk sets. Risk is an operator judgment, not a computed
// property, so the registry is data: either the built-in default or a file.
struct PortRiskRegistry {
    std::map<uint16_t, std::string> high_risk;  // port -> label
    // explicit low-risk list; when absent, the bottom quartile of observed
    // ports by packet volume is used instead
    std::optional<std::map<uint16_t, std::string>> low_risk;

    static PortRiskRegistry standard();
};

// "Port,Label,Risk" with Risk in {high, low}. Any low row switches the
// registry to the explicit-list policy.
PortRiskRegistry load_port_risk_registry(std::istream& in);
PortRiskRegistry load_port_risk_registry(const std::string& path);

struct PortTraffic {
    uint64_t packets = 0;
    uint64_t records = 0;

    bool operator==(const PortTraffic&) const = default;
};

struct PortRiskRow {
    uint16_t port = 0;
    std::string label;
    bool high_risk = false;
    uint64_t packets = 0;
    uint64_t records = 0;

    bool operator==(const PortRiskRow&) const = default;
};

struct PortRiskComparison {
    // high block first, then low; each sorted by packets descending, ties by
    // ascending port. Registry ports absent from traffic appear with zeros.
    std::vector<PortRiskRow> rows;
    uint64_t high_packets = 0;
    uint64_t high_records = 0;
    uint64_t low_packets = 0;
    uint64_t low_records = 0;
    // absent when the low side carries no packets
    std::optional<double> high_low_packet_ratio;

    bool operator==(const PortRiskComparison&) const = default;
};

PortRiskComparison compare_port_risk(const std::map<uint16_t, PortTraffic>& by_port,
                                     const PortRiskRegistry& registry);
PortRiskComparison compare_port_risk(const std::vector<ConnectionRecord>& records,
                                     const PortRiskRegistry& registry);

// hourly volume split over the leading ASNs plus the all-ASN total; silent
// hours inside the window appear with zeros
struct HourlyVolumeTable {
    std::vector<uint32_t> asns;  // column order: packets descending, ties ascending

    struct Row {
        int64_t hour = 0;
        std::vector<uint64_t> per_asn;  // aligned with asns
        uint64_t total = 0;

        bool operator==(const Row&) const = default;
    };
    std::vector<Row> rows;

    bool operator==(const HourlyVolumeTable&) const = default;
};

HourlyVolumeTable hourly_volume_by_asn(const HourlyAccumulator& acc,
                                       const HourWindow& window,
                                       size_t top_asns = 5);

// top-N slice of a full group-by; the tail is preserved as an aggregate so
// the table still reconciles to the dataset total
struct TopTable {
    std::vector<std::pair<std::string, uint64_t>> rows;
    uint64_t other_packets = 0;
    uint64_t total_packets = 0;

    bool operator==(const TopTable&) const = default;
};

template <typename Map, typename Format>
TopTable make_top_table(const Map& by_key, size_t n, Format&& format_key) {
    TopTable table;
    for (const auto& [key, packets] : by_key) table.total_packets += packets;
    auto top = top_n(by_key, n);
    uint64_t listed = 0;
    for (const auto& [key, packets] : top) {
        table.rows.emplace_back(format_key(key), packets);
        listed += packets;
    }
    table.other_packets = table.total_packets - listed;
    return table;
}

struct DetectionSummary {
    uint64_t scan_threshold = 5;
    uint64_t scanner_count = 0;
    std::vector<std::string> scanners;  // dotted quads, ascending
    uint64_t backscatter_records = 0;
    uint64_t backscatter_packets = 0;
    uint64_t unclassified_records = 0;
    uint64_t candidate_records = 0;
    FingerprintTally fingerprints;

    bool operator==(const DetectionSummary&) const = default;
};

DetectionSummary summarize_detection(const DetectionLabels& labels);

struct GroundTruthEval {
    double scanner_precision = 0.0;
    double scanner_recall = 0.0;
    double backscatter_precision = 0.0;
    double backscatter_recall = 0.0;
    uint64_t asn_class_expected = 0;
    uint64_t asn_class_matched = 0;

    bool operator==(const GroundTruthEval&) const = default;
};

struct RunMetadata {
    std::string tool_version;
    std::string input_path;
    std::string input_digest;  // fnv1a-64 hex over the consumed bytes
    // effective config after defaults/file/flags merge, insertion order
    std::vector<std::pair<std::string, std::string>> config;

    bool operator==(const RunMetadata&) const = default;
};

struct AnalysisReport {
    DatasetSummary summary;
    CleaningReport cleaning;
    DetectionSummary detection;
    LorenzResult lorenz;  // points may be thinned; gini is exact
    PercentileTable percentiles;
    EntropySeries entropy;
    std::vector<AsnActivity> burstiness;
    HourlyVolumeTable hourly_volume;
    TopTable top_countries;
    TopTable top_asns;
    TopTable top_ports;
    PortRiskComparison port_risk;
    std::optional<GroundTruthEval> ground_truth;
    RunMetadata run;
};

// keeps first/last points and an even stride in between; gini untouched
LorenzResult downsample_lorenz(const LorenzResult& full, size_t max_points = 512);

// single JSON document, stable key order, numbers serialized so parsing them
// back reproduces the exact values
std::string report_to_json(const AnalysisReport& report);

// exact inverse of report_to_json; throws Error(input_format) on anything
// that is not a report document
AnalysisReport report_from_json(const std::string& text);

enum class ReportFormat { json, csv_bundle };
std::optional<ReportFormat> parse_report_format(std::string_view text);

// json: <out_dir>/report.json; csv_bundle: fixed per-table file set in
// <out_dir>. Both byte-deterministic for equal reports.
void write_report(const AnalysisReport& report, ReportFormat format,
                  const std::string& out_dir);

struct PlotTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_csv() const;
};

// which: hourly_volume_by_asn_topN, entropy_raw, entropy_normalized, lorenz,
// top_countries, port_risk
PlotTable plot_series(const AnalysisReport& report, std::string_view which);
const std::vector<std::string>& plot_series_names();

}  // namespace ibrkit
