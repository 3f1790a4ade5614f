#include "ibrkit/report.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ibrkit/csv.hpp"
#include "ibrkit/errors.hpp"

namespace ibrkit {

using nlohmann::ordered_json;

PortRiskRegistry PortRiskRegistry::standard() {
    PortRiskRegistry registry;
    registry.high_risk = {
        {23, "Telnet"},   {53, "DNS"},        {80, "HTTP"},
        {81, "Hosts2-ns"}, {443, "HTTPS"},    {445, "SMB"},
        {2323, "Telnet Alt"}, {5555, "ADB"},  {8080, "HTTP Alt"},
        {8443, "HTTPS Alt"}, {56766, "unlabeled"},
    };
    return registry;
}

PortRiskRegistry load_port_risk_registry(std::istream& in) {
    CsvReader reader(in);
    PortRiskRegistry registry;
    std::map<uint16_t, std::string> low;
    bool any_low = false;
    std::vector<std::string> fields;
    std::string error;
    bool header_seen = false;
    for (;;) {
        auto status = reader.next_row(fields, error);
        if (status == CsvReader::RowStatus::end) break;
        if (status == CsvReader::RowStatus::malformed) {
            throw input_error("malformed registry row: " + error);
        }
        if (!fields.empty() && !fields[0].empty() && fields[0][0] == '#') continue;
        if (!header_seen) {
            const std::vector<std::string> expected = {"Port", "Label", "Risk"};
            if (fields != expected) {
                throw input_error("registry header must be Port,Label,Risk");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 3) {
            throw input_error("registry row needs 3 fields, got " +
                              std::to_string(fields.size()));
        }
        int64_t port = 0;
        auto [ptr, ec] = std::from_chars(fields[0].data(),
                                         fields[0].data() + fields[0].size(), port);
        if (ec != std::errc() || ptr != fields[0].data() + fields[0].size() ||
            port < 1 || port > 65535) {
            throw input_error("registry port out of range: " + fields[0]);
        }
        auto key = static_cast<uint16_t>(port);
        if (registry.high_risk.count(key) || low.count(key)) {
            throw input_error("registry lists port twice: " + fields[0]);
        }
        if (fields[2] == "high") {
            registry.high_risk.emplace(key, fields[1]);
        } else if (fields[2] == "low") {
            low.emplace(key, fields[1]);
            any_low = true;
        } else {
            throw input_error("registry risk must be high or low, got: " + fields[2]);
        }
    }
    if (!header_seen) throw input_error("registry file is empty");
    if (any_low) registry.low_risk = std::move(low);
    return registry;
}

PortRiskRegistry load_port_risk_registry(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open registry file: " + path);
    return load_port_risk_registry(in);
}

namespace {

void sort_risk_block(std::vector<PortRiskRow>& rows, size_t begin) {
    std::sort(rows.begin() + begin, rows.end(), [](const auto& a, const auto& b) {
        if (a.packets != b.packets) return a.packets > b.packets;
        return a.port < b.port;
    });
}

}  // namespace

PortRiskComparison compare_port_risk(const std::map<uint16_t, PortTraffic>& by_port,
                                     const PortRiskRegistry& registry) {
    PortRiskComparison result;
    auto traffic_of = [&](uint16_t port) {
        auto it = by_port.find(port);
        return it == by_port.end() ? PortTraffic{} : it->second;
    };

    for (const auto& [port, label] : registry.high_risk) {
        auto t = traffic_of(port);
        result.rows.push_back({port, label, true, t.packets, t.records});
        result.high_packets += t.packets;
        result.high_records += t.records;
    }
    sort_risk_block(result.rows, 0);
    size_t low_begin = result.rows.size();

    if (registry.low_risk) {
        for (const auto& [port, label] : *registry.low_risk) {
            auto t = traffic_of(port);
            result.rows.push_back({port, label, false, t.packets, t.records});
            result.low_packets += t.packets;
            result.low_records += t.records;
        }
    } else {
        // bottom quartile of observed non-high ports by packet volume
        std::vector<std::pair<uint16_t, PortTraffic>> observed;
        for (const auto& [port, t] : by_port) {
            if (!registry.high_risk.count(port)) observed.emplace_back(port, t);
        }
        std::sort(observed.begin(), observed.end(), [](const auto& a, const auto& b) {
            if (a.second.packets != b.second.packets) {
                return a.second.packets < b.second.packets;
            }
            return a.first < b.first;
        });
        size_t quartile = (observed.size() + 3) / 4;
        for (size_t i = 0; i < quartile; ++i) {
            const auto& [port, t] = observed[i];
            result.rows.push_back({port, "", false, t.packets, t.records});
            result.low_packets += t.packets;
            result.low_records += t.records;
        }
    }
    sort_risk_block(result.rows, low_begin);

    if (result.low_packets > 0) {
        result.high_low_packet_ratio = static_cast<double>(result.high_packets) /
                                       static_cast<double>(result.low_packets);
    }
    return result;
}

PortRiskComparison compare_port_risk(const std::vector<ConnectionRecord>& records,
                                     const PortRiskRegistry& registry) {
    std::map<uint16_t, PortTraffic> by_port;
    for (const auto& r : records) {
        auto& t = by_port[r.port];
        t.packets += r.packets;
        t.records += 1;
    }
    return compare_port_risk(by_port, registry);
}

HourlyVolumeTable hourly_volume_by_asn(const HourlyAccumulator& acc,
                                       const HourWindow& window, size_t top_asns) {
    HourlyVolumeTable table;
    if (window.empty()) return table;

    std::map<uint32_t, uint64_t> asn_totals;
    for (const auto& [hour, cell] : acc.cells()) {
        (void)hour;
        for (const auto& [asn, w] : cell.by_asn) asn_totals[asn] += w.packets;
    }
    for (const auto& [asn, packets] : top_n(asn_totals, top_asns)) {
        (void)packets;
        table.asns.push_back(asn);
    }

    const auto& cells = acc.cells();
    for (int64_t hour = window.first_hour; hour <= window.last_hour; ++hour) {
        HourlyVolumeTable::Row row;
        row.hour = hour;
        row.per_asn.assign(table.asns.size(), 0);
        auto it = cells.find(hour);
        if (it != cells.end()) {
            row.total = it->second.packets;
            for (size_t i = 0; i < table.asns.size(); ++i) {
                auto a = it->second.by_asn.find(table.asns[i]);
                if (a != it->second.by_asn.end()) row.per_asn[i] = a->second.packets;
            }
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

DetectionSummary summarize_detection(const DetectionLabels& labels) {
    DetectionSummary summary;
    summary.scan_threshold = labels.scan_threshold_used;
    summary.scanner_count = labels.scanners.size();
    summary.scanners.reserve(labels.scanners.size());
    for (const auto& ip : labels.scanners) summary.scanners.push_back(format_ipv4(ip));
    summary.backscatter_records = labels.backscatter.record_indices.size();
    summary.backscatter_packets = labels.backscatter.backscatter_packets;
    summary.unclassified_records = labels.backscatter.unclassified_records;
    summary.candidate_records = labels.backscatter.candidate_records;
    summary.fingerprints = labels.fingerprint_counts;
    return summary;
}

LorenzResult downsample_lorenz(const LorenzResult& full, size_t max_points) {
    if (max_points < 2 || full.points.size() <= max_points) return full;
    LorenzResult thin;
    thin.gini = full.gini;
    size_t n = full.points.size();
    size_t stride = (n + max_points - 2) / (max_points - 1);
    for (size_t i = 0; i < n - 1; i += stride) thin.points.push_back(full.points[i]);
    thin.points.push_back(full.points.back());
    return thin;
}

namespace {

ordered_json fingerprints_json(const FingerprintTally& t) {
    ordered_json j;
    j["zmap_records"] = t.zmap_records;
    j["zmap_packets"] = t.zmap_packets;
    j["masscan_records"] = t.masscan_records;
    j["masscan_packets"] = t.masscan_packets;
    j["mirai_records"] = t.mirai_records;
    j["mirai_packets"] = t.mirai_packets;
    return j;
}

ordered_json top_table_json(const TopTable& table) {
    ordered_json j;
    auto rows = ordered_json::array();
    for (const auto& [key, packets] : table.rows) {
        rows.push_back(ordered_json{{"key", key}, {"packets", packets}});
    }
    j["rows"] = std::move(rows);
    j["other_packets"] = table.other_packets;
    j["total_packets"] = table.total_packets;
    return j;
}

std::string u64s(uint64_t v) { return std::to_string(v); }
std::string i64s(int64_t v) { return std::to_string(v); }

}  // namespace

std::string report_to_json(const AnalysisReport& report) {
    ordered_json j;

    auto& run = j["run"];
    run["version"] = report.run.tool_version;
    run["input_path"] = report.run.input_path;
    run["input_digest"] = report.run.input_digest;
    auto& config = run["config"];
    config = ordered_json::object();
    for (const auto& [key, value] : report.run.config) config[key] = value;

    auto& summary = j["summary"];
    summary["record_count"] = report.summary.record_count;
    summary["total_packets"] = report.summary.total_packets;
    summary["total_bytes"] = report.summary.total_bytes;
    summary["unique_source_ips"] = report.summary.unique_source_ips;
    summary["unique_ports"] = report.summary.unique_ports;
    summary["unique_asns"] = report.summary.unique_asns;
    summary["time_span_first"] = report.summary.time_span_first;
    summary["time_span_last"] = report.summary.time_span_last;

    auto& cleaning = j["cleaning"];
    cleaning["rows_read"] = report.cleaning.rows_read;
    cleaning["rows_retained"] = report.cleaning.rows_retained;
    cleaning["rejected_total"] = report.cleaning.rejected_total();
    auto& rejected = cleaning["rejected"];
    rejected = ordered_json::object();
    for (const auto& [reason, count] : report.cleaning.rejected_by_reason) {
        rejected[std::string(to_string(reason))] = count;
    }

    auto& detection = j["detection"];
    detection["scan_threshold"] = report.detection.scan_threshold;
    detection["scanner_count"] = report.detection.scanner_count;
    detection["scanners"] = report.detection.scanners;
    detection["backscatter_records"] = report.detection.backscatter_records;
    detection["backscatter_packets"] = report.detection.backscatter_packets;
    detection["unclassified_records"] = report.detection.unclassified_records;
    detection["candidate_records"] = report.detection.candidate_records;
    detection["fingerprints"] = fingerprints_json(report.detection.fingerprints);

    auto& concentration = j["concentration"];
    concentration["gini"] = report.lorenz.gini;
    auto lorenz = ordered_json::array();
    for (const auto& [x, y] : report.lorenz.points) {
        lorenz.push_back(ordered_json::array({x, y}));
    }
    concentration["lorenz"] = std::move(lorenz);
    auto percentiles = ordered_json::array();
    for (const auto& row : report.percentiles.rows) {
        percentiles.push_back(ordered_json{{"percentile", row.percentile},
                                           {"ip_count", row.ip_count},
                                           {"packet_volume", row.packet_volume},
                                           {"cumulative_share", row.cumulative_share}});
    }
    concentration["percentile_table"] = std::move(percentiles);

    auto& entropy = j["entropy"];
    entropy["first_hour"] = report.entropy.window.first_hour;
    entropy["last_hour"] = report.entropy.window.last_hour;
    auto entropy_rows = ordered_json::array();
    for (const auto& row : report.entropy.rows) {
        entropy_rows.push_back(ordered_json{
            {"hour", row.hour},
            {"total_packets", row.total_packets},
            {"total_records", row.total_records},
            {"distinct_ports", row.distinct_ports},
            {"distinct_asns", row.distinct_asns},
            {"port_entropy_raw", row.raw_port_entropy},
            {"port_entropy_normalized", row.norm_port_entropy},
            {"asn_entropy_raw", row.raw_asn_entropy},
            {"asn_entropy_normalized", row.norm_asn_entropy}});
    }
    entropy["rows"] = std::move(entropy_rows);

    auto burstiness = ordered_json::array();
    for (const auto& row : report.burstiness) {
        burstiness.push_back(ordered_json{{"asn", row.asn},
                                          {"total_packets", row.total_packets},
                                          {"active_hours", row.active_hours},
                                          {"activity_ratio", row.activity_ratio},
                                          {"label", std::string(to_string(row.label))}});
    }
    j["burstiness"] = std::move(burstiness);

    auto& hourly = j["hourly_volume"];
    hourly["asns"] = report.hourly_volume.asns;
    auto hourly_rows = ordered_json::array();
    for (const auto& row : report.hourly_volume.rows) {
        hourly_rows.push_back(ordered_json{
            {"hour", row.hour}, {"per_asn", row.per_asn}, {"total", row.total}});
    }
    hourly["rows"] = std::move(hourly_rows);

    j["top_countries"] = top_table_json(report.top_countries);
    j["top_asns"] = top_table_json(report.top_asns);
    j["top_ports"] = top_table_json(report.top_ports);

    auto& risk = j["port_risk"];
    auto risk_rows = ordered_json::array();
    for (const auto& row : report.port_risk.rows) {
        risk_rows.push_back(ordered_json{{"port", row.port},
                                         {"label", row.label},
                                         {"risk", row.high_risk ? "high" : "low"},
                                         {"packets", row.packets},
                                         {"records", row.records}});
    }
    risk["rows"] = std::move(risk_rows);
    risk["high_packets"] = report.port_risk.high_packets;
    risk["high_records"] = report.port_risk.high_records;
    risk["low_packets"] = report.port_risk.low_packets;
    risk["low_records"] = report.port_risk.low_records;
    if (report.port_risk.high_low_packet_ratio) {
        risk["high_low_packet_ratio"] = *report.port_risk.high_low_packet_ratio;
    } else {
        risk["high_low_packet_ratio"] = nullptr;
    }

    if (report.ground_truth) {
        auto& truth = j["ground_truth_eval"];
        truth["scanner_precision"] = report.ground_truth->scanner_precision;
        truth["scanner_recall"] = report.ground_truth->scanner_recall;
        truth["backscatter_precision"] = report.ground_truth->backscatter_precision;
        truth["backscatter_recall"] = report.ground_truth->backscatter_recall;
        truth["asn_class_expected"] = report.ground_truth->asn_class_expected;
        truth["asn_class_matched"] = report.ground_truth->asn_class_matched;
    }

    return j.dump(2) + "\n";
}

namespace {

std::optional<RejectReason> parse_reject_reason(std::string_view name) {
    for (auto reason : {RejectReason::null_critical_field, RejectReason::zero_packets,
                        RejectReason::invalid_port, RejectReason::malformed_field}) {
        if (to_string(reason) == name) return reason;
    }
    return std::nullopt;
}

TopTable top_table_from_json(const ordered_json& j) {
    TopTable table;
    for (const auto& row : j.at("rows")) {
        table.rows.emplace_back(row.at("key").get<std::string>(),
                                row.at("packets").get<uint64_t>());
    }
    table.other_packets = j.at("other_packets").get<uint64_t>();
    table.total_packets = j.at("total_packets").get<uint64_t>();
    return table;
}

}  // namespace

AnalysisReport report_from_json(const std::string& text) {
    try {
        const auto j = ordered_json::parse(text);
        AnalysisReport report;

        const auto& run = j.at("run");
        report.run.tool_version = run.at("version").get<std::string>();
        report.run.input_path = run.at("input_path").get<std::string>();
        report.run.input_digest = run.at("input_digest").get<std::string>();
        for (const auto& item : run.at("config").items()) {
            report.run.config.emplace_back(item.key(), item.value().get<std::string>());
        }

        const auto& summary = j.at("summary");
        report.summary.record_count = summary.at("record_count").get<uint64_t>();
        report.summary.total_packets = summary.at("total_packets").get<uint64_t>();
        report.summary.total_bytes = summary.at("total_bytes").get<uint64_t>();
        report.summary.unique_source_ips = summary.at("unique_source_ips").get<uint64_t>();
        report.summary.unique_ports = summary.at("unique_ports").get<uint64_t>();
        report.summary.unique_asns = summary.at("unique_asns").get<uint64_t>();
        report.summary.time_span_first = summary.at("time_span_first").get<int64_t>();
        report.summary.time_span_last = summary.at("time_span_last").get<int64_t>();

        const auto& cleaning = j.at("cleaning");
        report.cleaning.rows_read = cleaning.at("rows_read").get<uint64_t>();
        report.cleaning.rows_retained = cleaning.at("rows_retained").get<uint64_t>();
        for (const auto& item : cleaning.at("rejected").items()) {
            auto reason = parse_reject_reason(item.key());
            if (!reason) throw input_error("unknown reject reason: " + item.key());
            report.cleaning.rejected_by_reason[*reason] = item.value().get<uint64_t>();
        }
        if (cleaning.at("rejected_total").get<uint64_t>() !=
            report.cleaning.rejected_total()) {
            throw input_error("rejected_total does not match the per-reason sum");
        }

        const auto& detection = j.at("detection");
        report.detection.scan_threshold = detection.at("scan_threshold").get<uint64_t>();
        report.detection.scanner_count = detection.at("scanner_count").get<uint64_t>();
        report.detection.scanners =
            detection.at("scanners").get<std::vector<std::string>>();
        report.detection.backscatter_records =
            detection.at("backscatter_records").get<uint64_t>();
        report.detection.backscatter_packets =
            detection.at("backscatter_packets").get<uint64_t>();
        report.detection.unclassified_records =
            detection.at("unclassified_records").get<uint64_t>();
        report.detection.candidate_records =
            detection.at("candidate_records").get<uint64_t>();
        const auto& fp = detection.at("fingerprints");
        report.detection.fingerprints.zmap_records = fp.at("zmap_records").get<uint64_t>();
        report.detection.fingerprints.zmap_packets = fp.at("zmap_packets").get<uint64_t>();
        report.detection.fingerprints.masscan_records =
            fp.at("masscan_records").get<uint64_t>();
        report.detection.fingerprints.masscan_packets =
            fp.at("masscan_packets").get<uint64_t>();
        report.detection.fingerprints.mirai_records =
            fp.at("mirai_records").get<uint64_t>();
        report.detection.fingerprints.mirai_packets =
            fp.at("mirai_packets").get<uint64_t>();

        const auto& concentration = j.at("concentration");
        report.lorenz.gini = concentration.at("gini").get<double>();
        for (const auto& point : concentration.at("lorenz")) {
            if (point.size() != 2) throw input_error("lorenz points must be pairs");
            report.lorenz.points.emplace_back(point.at(0).get<double>(),
                                              point.at(1).get<double>());
        }
        for (const auto& row : concentration.at("percentile_table")) {
            PercentileRow p;
            p.percentile = row.at("percentile").get<double>();
            p.ip_count = row.at("ip_count").get<uint64_t>();
            p.packet_volume = row.at("packet_volume").get<uint64_t>();
            p.cumulative_share = row.at("cumulative_share").get<double>();
            report.percentiles.rows.push_back(p);
        }

        const auto& entropy = j.at("entropy");
        report.entropy.window.first_hour = entropy.at("first_hour").get<int64_t>();
        report.entropy.window.last_hour = entropy.at("last_hour").get<int64_t>();
        for (const auto& row : entropy.at("rows")) {
            EntropyRow e;
            e.hour = row.at("hour").get<int64_t>();
            e.total_packets = row.at("total_packets").get<uint64_t>();
            e.total_records = row.at("total_records").get<uint64_t>();
            e.distinct_ports = row.at("distinct_ports").get<uint64_t>();
            e.distinct_asns = row.at("distinct_asns").get<uint64_t>();
            e.raw_port_entropy = row.at("port_entropy_raw").get<double>();
            e.norm_port_entropy = row.at("port_entropy_normalized").get<double>();
            e.raw_asn_entropy = row.at("asn_entropy_raw").get<double>();
            e.norm_asn_entropy = row.at("asn_entropy_normalized").get<double>();
            report.entropy.rows.push_back(e);
        }

        for (const auto& row : j.at("burstiness")) {
            AsnActivity a;
            a.asn = row.at("asn").get<uint32_t>();
            a.total_packets = row.at("total_packets").get<uint64_t>();
            a.active_hours = row.at("active_hours").get<uint64_t>();
            a.activity_ratio = row.at("activity_ratio").get<double>();
            auto label = parse_burstiness_label(row.at("label").get<std::string>());
            if (!label) {
                throw input_error("unknown burstiness label: " +
                                  row.at("label").get<std::string>());
            }
            a.label = *label;
            report.burstiness.push_back(a);
        }

        const auto& hourly = j.at("hourly_volume");
        report.hourly_volume.asns = hourly.at("asns").get<std::vector<uint32_t>>();
        for (const auto& row : hourly.at("rows")) {
            HourlyVolumeTable::Row r;
            r.hour = row.at("hour").get<int64_t>();
            r.per_asn = row.at("per_asn").get<std::vector<uint64_t>>();
            r.total = row.at("total").get<uint64_t>();
            if (r.per_asn.size() != report.hourly_volume.asns.size()) {
                throw input_error("hourly_volume row width does not match asns");
            }
            report.hourly_volume.rows.push_back(std::move(r));
        }

        report.top_countries = top_table_from_json(j.at("top_countries"));
        report.top_asns = top_table_from_json(j.at("top_asns"));
        report.top_ports = top_table_from_json(j.at("top_ports"));

        const auto& risk = j.at("port_risk");
        for (const auto& row : risk.at("rows")) {
            PortRiskRow r;
            r.port = row.at("port").get<uint16_t>();
            r.label = row.at("label").get<std::string>();
            auto kind = row.at("risk").get<std::string>();
            if (kind != "high" && kind != "low") {
                throw input_error("port risk must be high or low, got " + kind);
            }
            r.high_risk = kind == "high";
            r.packets = row.at("packets").get<uint64_t>();
            r.records = row.at("records").get<uint64_t>();
            report.port_risk.rows.push_back(std::move(r));
        }
        report.port_risk.high_packets = risk.at("high_packets").get<uint64_t>();
        report.port_risk.high_records = risk.at("high_records").get<uint64_t>();
        report.port_risk.low_packets = risk.at("low_packets").get<uint64_t>();
        report.port_risk.low_records = risk.at("low_records").get<uint64_t>();
        const auto& ratio = risk.at("high_low_packet_ratio");
        if (!ratio.is_null()) report.port_risk.high_low_packet_ratio = ratio.get<double>();

        if (j.contains("ground_truth_eval")) {
            const auto& truth = j.at("ground_truth_eval");
            GroundTruthEval eval;
            eval.scanner_precision = truth.at("scanner_precision").get<double>();
            eval.scanner_recall = truth.at("scanner_recall").get<double>();
            eval.backscatter_precision = truth.at("backscatter_precision").get<double>();
            eval.backscatter_recall = truth.at("backscatter_recall").get<double>();
            eval.asn_class_expected = truth.at("asn_class_expected").get<uint64_t>();
            eval.asn_class_matched = truth.at("asn_class_matched").get<uint64_t>();
            report.ground_truth = eval;
        }

        return report;
    } catch (const ordered_json::exception& e) {
        throw input_error(std::string("malformed report json: ") + e.what());
    }
}

std::optional<ReportFormat> parse_report_format(std::string_view text) {
    if (text == "json") return ReportFormat::json;
    if (text == "csv" || text == "csv-bundle") return ReportFormat::csv_bundle;
    return std::nullopt;
}

namespace {

struct BundleFile {
    std::string name;
    std::vector<std::vector<std::string>> rows;  // header included
};

std::vector<BundleFile> csv_bundle_tables(const AnalysisReport& report) {
    std::vector<BundleFile> files;

    files.push_back(
        {"summary.csv",
         {{"record_count", "total_packets", "total_bytes", "unique_source_ips",
           "unique_ports", "unique_asns", "time_span_first", "time_span_last",
           "gini"},
          {u64s(report.summary.record_count), u64s(report.summary.total_packets),
           u64s(report.summary.total_bytes), u64s(report.summary.unique_source_ips),
           u64s(report.summary.unique_ports), u64s(report.summary.unique_asns),
           i64s(report.summary.time_span_first), i64s(report.summary.time_span_last),
           format_double(report.lorenz.gini)}}});

    BundleFile cleaning{"cleaning.csv", {{"Metric", "Count"}}};
    cleaning.rows.push_back({"rows_read", u64s(report.cleaning.rows_read)});
    cleaning.rows.push_back({"rows_retained", u64s(report.cleaning.rows_retained)});
    cleaning.rows.push_back({"rejected_total", u64s(report.cleaning.rejected_total())});
    for (const auto& [reason, count] : report.cleaning.rejected_by_reason) {
        cleaning.rows.push_back(
            {"rejected:" + std::string(to_string(reason)), u64s(count)});
    }
    files.push_back(std::move(cleaning));

    BundleFile percentile{"percentile_table.csv",
                          {{"Percentile", "IpCount", "PacketVolume",
                            "CumulativeShare"}}};
    for (const auto& row : report.percentiles.rows) {
        percentile.rows.push_back({format_double(row.percentile), u64s(row.ip_count),
                                   u64s(row.packet_volume),
                                   format_double(row.cumulative_share)});
    }
    files.push_back(std::move(percentile));

    BundleFile entropy{"entropy_series.csv",
                       {{"Hour", "TotalPackets", "TotalRecords", "DistinctPorts",
                         "DistinctAsns", "PortEntropyRaw", "PortEntropyNormalized",
                         "AsnEntropyRaw", "AsnEntropyNormalized"}}};
    for (const auto& row : report.entropy.rows) {
        entropy.rows.push_back(
            {i64s(row.hour), u64s(row.total_packets), u64s(row.total_records),
             u64s(row.distinct_ports), u64s(row.distinct_asns),
             format_double(row.raw_port_entropy),
             format_double(row.norm_port_entropy),
             format_double(row.raw_asn_entropy),
             format_double(row.norm_asn_entropy)});
    }
    files.push_back(std::move(entropy));

    BundleFile burstiness{"burstiness.csv",
                          {{"Asn", "TotalPackets", "ActiveHours", "ActivityRatio",
                            "Label"}}};
    for (const auto& row : report.burstiness) {
        burstiness.rows.push_back({u64s(row.asn), u64s(row.total_packets),
                                   u64s(row.active_hours),
                                   format_double(row.activity_ratio),
                                   std::string(to_string(row.label))});
    }
    files.push_back(std::move(burstiness));

    auto top_file = [](const std::string& name, const std::string& key_header,
                       const TopTable& table) {
        BundleFile f{name, {{key_header, "Packets"}}};
        for (const auto& [key, packets] : table.rows) {
            f.rows.push_back({key, u64s(packets)});
        }
        f.rows.push_back({"OTHER", u64s(table.other_packets)});
        f.rows.push_back({"TOTAL", u64s(table.total_packets)});
        return f;
    };
    files.push_back(top_file("top_countries.csv", "Country", report.top_countries));
    files.push_back(top_file("top_asns.csv", "Asn", report.top_asns));
    files.push_back(top_file("top_ports.csv", "Port", report.top_ports));

    BundleFile risk{"port_risk.csv", {{"Port", "Label", "Risk", "Packets", "Records"}}};
    for (const auto& row : report.port_risk.rows) {
        risk.rows.push_back({u64s(row.port), row.label,
                             row.high_risk ? "high" : "low", u64s(row.packets),
                             u64s(row.records)});
    }
    files.push_back(std::move(risk));

    BundleFile lorenz{"lorenz.csv", {{"CumulativeSources", "CumulativeShare"}}};
    for (const auto& [x, y] : report.lorenz.points) {
        lorenz.rows.push_back({format_double(x), format_double(y)});
    }
    files.push_back(std::move(lorenz));

    return files;
}

}  // namespace

void write_report(const AnalysisReport& report, ReportFormat format,
                  const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create output directory: " + out_dir);

    auto open = [&](const std::string& name) {
        std::ofstream out(out_dir + "/" + name, std::ios::binary);
        if (!out) throw io_error("cannot write " + out_dir + "/" + name);
        return out;
    };

    if (format == ReportFormat::json) {
        auto out = open("report.json");
        out << report_to_json(report);
        if (!out) throw io_error("short write to report.json");
        return;
    }
    for (const auto& file : csv_bundle_tables(report)) {
        auto out = open(file.name);
        for (const auto& row : file.rows) write_csv_row(out, row);
        if (!out) throw io_error("short write to " + file.name);
    }
}

std::string PlotTable::to_csv() const {
    std::ostringstream out;
    write_csv_row(out, header);
    for (const auto& row : rows) write_csv_row(out, row);
    return out.str();
}

const std::vector<std::string>& plot_series_names() {
    static const std::vector<std::string> names = {
        "hourly_volume_by_asn_topN", "entropy_raw", "entropy_normalized",
        "lorenz", "top_countries", "port_risk"};
    return names;
}

PlotTable plot_series(const AnalysisReport& report, std::string_view which) {
    PlotTable table;
    if (which == "hourly_volume_by_asn_topN") {
        table.header.push_back("hour");
        for (uint32_t asn : report.hourly_volume.asns) {
            table.header.push_back("asn_" + std::to_string(asn));
        }
        table.header.push_back("total");
        for (const auto& row : report.hourly_volume.rows) {
            std::vector<std::string> out{i64s(row.hour)};
            for (uint64_t v : row.per_asn) out.push_back(u64s(v));
            out.push_back(u64s(row.total));
            table.rows.push_back(std::move(out));
        }
        return table;
    }
    if (which == "entropy_raw" || which == "entropy_normalized") {
        bool raw = which == "entropy_raw";
        table.header = {"hour", "port_entropy", "asn_entropy"};
        for (const auto& row : report.entropy.rows) {
            table.rows.push_back(
                {i64s(row.hour),
                 format_double(raw ? row.raw_port_entropy : row.norm_port_entropy),
                 format_double(raw ? row.raw_asn_entropy : row.norm_asn_entropy)});
        }
        return table;
    }
    if (which == "lorenz") {
        table.header = {"cumulative_sources", "cumulative_share"};
        for (const auto& [x, y] : report.lorenz.points) {
            table.rows.push_back({format_double(x), format_double(y)});
        }
        return table;
    }
    if (which == "top_countries") {
        table.header = {"country", "packets"};
        for (const auto& [key, packets] : report.top_countries.rows) {
            table.rows.push_back({key, u64s(packets)});
        }
        return table;
    }
    if (which == "port_risk") {
        table.header = {"port", "label", "risk", "packets", "records"};
        for (const auto& row : report.port_risk.rows) {
            table.rows.push_back({u64s(row.port), row.label,
                                  row.high_risk ? "high" : "low", u64s(row.packets),
                                  u64s(row.records)});
        }
        return table;
    }
    std::string known;
    for (const auto& name : plot_series_names()) {
        if (!known.empty()) known += ", ";
        known += name;
    }
    throw usage_error("unknown_series: " + std::string(which) + " (known: " + known + ")");
}

}  // namespace ibrkit
