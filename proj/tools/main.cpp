// ibrkit: darknet traffic analysis from connection-record CSVs.
//
// Exit codes are a stable scripting contract: 0 success, 1 config/usage
// error, 2 input-format error, 3 I/O error.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ibrkit/analyze.hpp"
#include "ibrkit/enrich.hpp"
#include "ibrkit/errors.hpp"
#include "ibrkit/ingest.hpp"
#include "ibrkit/report.hpp"
#include "ibrkit/synth.hpp"

namespace fs = std::filesystem;
using namespace ibrkit;

namespace {

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return 1;
        case ErrorKind::input_format: return 2;
        case ErrorKind::io: return 3;
    }
    return 3;
}

std::vector<double> parse_percentiles(const std::string& text) {
    std::vector<double> out;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t comma = text.find(',', pos);
        if (comma == std::string::npos) comma = text.size();
        std::string_view token(text.data() + pos, comma - pos);
        double value = 0.0;
        auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
        if (ec != std::errc() || end != token.data() + token.size()) {
            throw usage_error("bad percentile '" + std::string(token) +
                              "' in --percentiles (want e.g. 0.01,0.05,0.1)");
        }
        if (!(value > 0.0) || value > 1.0) {
            throw usage_error("percentile " + std::string(token) +
                              " out of range (0, 1]");
        }
        out.push_back(value);
        pos = comma + 1;
    }
    if (out.empty()) throw usage_error("--percentiles must list at least one value");
    return out;
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw io_error("cannot create " + dir + ": " + ec.message());
}

void print_cleaning_lines(std::ostream& out, const CleaningReport& cleaning) {
    out << "rows: " << cleaning.rows_read << " read, " << cleaning.rows_retained
        << " retained, " << cleaning.rejected_total() << " rejected\n";
    for (const auto& [reason, count] : cleaning.rejected_by_reason) {
        out << "  " << to_string(reason) << ": " << count << "\n";
    }
}

struct AnalyzeArgs {
    std::string input;
    std::string snapshot;
    std::string enrich_policy = "fill";
    uint64_t scan_threshold = 5;
    uint64_t burst_volume = 1000000;
    double burst_activity = 0.5;
    std::string percentiles = "0.01,0.05,0.1";
    std::string risk_registry;
    std::string out_dir = "ibrkit-report";
    std::string format = "json";
    std::string entropy_weight = "packets";
    size_t workers = 1;
    size_t chunk_size = 64 * 1024;
    std::string rejects;
    std::string ground_truth;
    size_t top = 10;
    size_t hourly_series = 5;
    size_t lorenz_points = 512;
};

int cmd_analyze(const AnalyzeArgs& args) {
    AnalyzeOptions options;

    auto policy = parse_enrich_policy(args.enrich_policy);
    if (!policy) {
        throw usage_error("--enrich-policy must be fill or override, got " +
                          args.enrich_policy);
    }
    options.enrich_policy = *policy;

    if (args.scan_threshold < 1) throw usage_error("--scan-threshold must be >= 1");
    options.scan_threshold = args.scan_threshold;
    options.burst.volume_high = args.burst_volume;
    if (args.burst_activity < 0.0 || args.burst_activity > 1.0) {
        throw usage_error("--burst-activity must be within [0, 1]");
    }
    options.burst.activity = args.burst_activity;
    options.percentiles = parse_percentiles(args.percentiles);

    if (args.entropy_weight == "packets") {
        options.entropy_weight = EntropyWeight::packets;
    } else if (args.entropy_weight == "records") {
        options.entropy_weight = EntropyWeight::records;
    } else {
        throw usage_error("--entropy-weight must be packets or records, got " +
                          args.entropy_weight);
    }

    auto format = parse_report_format(args.format);
    if (!format) throw usage_error("--format must be json or csv, got " + args.format);

    if (args.workers < 1) throw usage_error("--workers must be >= 1");
    if (args.chunk_size < 1) throw usage_error("--chunk-size must be >= 1");
    if (args.top < 1) throw usage_error("--top must be >= 1");
    options.workers = args.workers;
    options.chunk_size = args.chunk_size;
    options.rejects_path = args.rejects;
    options.top_table_size = args.top;
    options.hourly_asn_series = args.hourly_series;
    options.lorenz_max_points = args.lorenz_points;

    EnrichmentSnapshot snapshot;
    if (!args.snapshot.empty()) {
        snapshot = load_snapshot(args.snapshot);
        options.snapshot = &snapshot;
    }
    if (!args.risk_registry.empty()) {
        options.registry = load_port_risk_registry(args.risk_registry);
    }
    GroundTruth truth;
    if (!args.ground_truth.empty()) {
        std::ifstream in(args.ground_truth, std::ios::binary);
        if (!in) throw io_error("cannot open ground truth: " + args.ground_truth);
        truth = load_ground_truth(in);
        options.ground_truth = &truth;
    }

    // every semantic knob, defaults materialized; worker count, chunk size,
    // and output destination are deliberately absent: results are invariant
    // to the former two, and the same analysis written to two places must
    // still be byte-identical
    options.config_echo = {
        {"input", args.input},
        {"snapshot", args.snapshot},
        {"enrich_policy", args.enrich_policy == "override" ? "override" : "fill"},
        {"scan_threshold", std::to_string(options.scan_threshold)},
        {"burst_volume", std::to_string(options.burst.volume_high)},
        {"burst_activity", format_double(options.burst.activity)},
        {"percentiles", join_doubles(options.percentiles)},
        {"risk_registry", args.risk_registry.empty() ? "builtin" : args.risk_registry},
        {"entropy_weight", args.entropy_weight},
        {"top_tables", std::to_string(options.top_table_size)},
        {"hourly_asn_series", std::to_string(options.hourly_asn_series)},
        {"lorenz_max_points", std::to_string(options.lorenz_max_points)},
        {"ground_truth", args.ground_truth},
    };

    auto report = analyze_file(args.input, options);

    // report.json always lands, so every run keeps its config echo and input
    // digest on disk; csv adds the per-table bundle next to it
    write_report(report, ReportFormat::json, args.out_dir);
    if (*format == ReportFormat::csv_bundle) {
        write_report(report, ReportFormat::csv_bundle, args.out_dir);
    }

    std::ostream& out = std::cout;
    out << "ibrkit " << kToolVersion << "\n";
    out << "input: " << report.run.input_path << "\n";
    out << "digest: fnv1a-64 " << report.run.input_digest << "\n";
    print_cleaning_lines(out, report.cleaning);
    out << "packets: " << report.summary.total_packets
        << "  bytes: " << report.summary.total_bytes << "\n";
    out << "sources: " << report.summary.unique_source_ips
        << "  ports: " << report.summary.unique_ports
        << "  asns: " << report.summary.unique_asns << "\n";
    out << "window: hour " << report.entropy.window.first_hour << " .. "
        << report.entropy.window.last_hour << " ("
        << report.entropy.window.hours() << " hours)\n";
    out << "gini: " << format_double(report.lorenz.gini) << "\n";
    for (const auto& row : report.percentiles.rows) {
        out << "top " << format_double(row.percentile) << ": " << row.ip_count
            << " sources, share " << format_double(row.cumulative_share) << "\n";
    }
    out << "scanners (>= " << report.detection.scan_threshold
        << " ports): " << report.detection.scanner_count << "\n";
    out << "backscatter: " << report.detection.backscatter_records << " records, "
        << report.detection.backscatter_packets << " packets\n";
    const auto& fp = report.detection.fingerprints;
    out << "tools: zmap " << fp.zmap_records << ", masscan " << fp.masscan_records
        << ", mirai " << fp.mirai_records << " records\n";
    if (options.snapshot) {
        const auto& tally = options.enrichment;
        out << "enrichment: " << tally.snapshot_hits << " hits, filled "
            << tally.filled_country << " country / " << tally.filled_asn
            << " asn, overridden " << tally.overridden_country << " / "
            << tally.overridden_asn << ", unknown after " << tally.unknown_country_after
            << " / " << tally.unknown_asn_after << "\n";
    }
    if (report.ground_truth) {
        const auto& eval = *report.ground_truth;
        out << "ground truth: scanners P " << format_double(eval.scanner_precision)
            << " R " << format_double(eval.scanner_recall) << ", backscatter P "
            << format_double(eval.backscatter_precision) << " R "
            << format_double(eval.backscatter_recall) << ", asn classes "
            << eval.asn_class_matched << "/" << eval.asn_class_expected << "\n";
    }
    out << "report: " << (fs::path(args.out_dir) / "report.json").string();
    if (*format == ReportFormat::csv_bundle) out << " (+ csv bundle)";
    out << "\n";
    return 0;
}

struct SynthArgs {
    std::string config;
    std::string out_dir = "ibrkit-synth";
    uint64_t seed = 0;
    bool seed_set = false;
};

int cmd_synth(const SynthArgs& args) {
    auto config = load_synth_config(args.config);
    if (args.seed_set) config.seed = args.seed;

    ensure_dir(args.out_dir);
    auto corpus_path = (fs::path(args.out_dir) / "corpus.csv").string();
    auto truth_path = (fs::path(args.out_dir) / "ground_truth.json").string();

    std::ofstream corpus(corpus_path, std::ios::binary);
    if (!corpus) throw io_error("cannot open " + corpus_path + " for writing");
    auto truth = generate_csv(config, corpus);
    corpus.flush();
    if (!corpus) throw io_error("short write to " + corpus_path);

    std::ofstream sidecar(truth_path, std::ios::binary);
    if (!sidecar) throw io_error("cannot open " + truth_path + " for writing");
    write_ground_truth(sidecar, truth, config);
    sidecar.flush();
    if (!sidecar) throw io_error("short write to " + truth_path);

    std::cout << "seed: " << config.seed << "\n";
    std::cout << "corpus: " << corpus_path << " (" << truth.records_emitted
              << " records, " << truth.packets_emitted << " packets)\n";
    std::cout << "ground truth: " << truth_path << " (" << truth.scanner_sources.size()
              << " scanners, " << truth.backscatter_record_ids.size()
              << " backscatter records, " << truth.asn_class.size()
              << " labeled asns)\n";
    std::cout << "effective config:\n" << config_to_json(config) << "\n";
    return 0;
}

struct ValidateArgs {
    std::string input;
    size_t chunk_size = 64 * 1024;
    std::string rejects;
};

int cmd_validate(const ValidateArgs& args) {
    std::ifstream in(args.input, std::ios::binary);
    if (!in) throw io_error("cannot open input: " + args.input);

    IngestOptions options;
    options.chunk_size = args.chunk_size;
    options.rejects_path = args.rejects;
    RecordReader reader(in, options);
    while (reader.next()) {
    }

    const auto& report = reader.report();
    std::cout << "input: " << args.input << "\n";
    std::cout << "digest: fnv1a-64 " << reader.digest_hex() << "\n";
    print_cleaning_lines(std::cout, report);
    std::cout << "conservation: rows_read == rows_retained + rejected -> "
              << (report.conserves() ? "holds" : "VIOLATED") << "\n";
    if (!report.conserves()) {
        std::cerr << "error: cleaning report does not conserve rows\n";
        return 2;
    }
    if (report.rows_retained == 0) {
        std::cerr << "error: no records retained from " << args.input << "\n";
        return 2;
    }
    return 0;
}

struct ConvertArgs {
    std::string report;
    std::string series;
    std::string format;
    std::string out;
};

int cmd_report_convert(const ConvertArgs& args) {
    if (args.series.empty() == args.format.empty()) {
        throw usage_error("pass exactly one of --series or --format");
    }

    std::ifstream in(args.report, std::ios::binary);
    if (!in) throw io_error("cannot open report: " + args.report);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto report = report_from_json(buffer.str());

    if (!args.series.empty()) {
        auto table = plot_series(report, args.series);
        if (args.out.empty()) {
            std::cout << table.to_csv();
        } else {
            std::ofstream out(args.out, std::ios::binary);
            if (!out) throw io_error("cannot open " + args.out + " for writing");
            out << table.to_csv();
            out.flush();
            if (!out) throw io_error("short write to " + args.out);
            std::cout << "series " << args.series << ": " << args.out << "\n";
        }
        return 0;
    }

    auto format = parse_report_format(args.format);
    if (!format) throw usage_error("--format must be json or csv, got " + args.format);
    if (args.out.empty()) throw usage_error("--format needs --out DIR");
    write_report(report, *format, args.out);
    std::cout << "report rewritten to " << args.out << " as " << args.format << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"darknet traffic analysis toolkit"};
    app.require_subcommand(1);

    AnalyzeArgs analyze_args;
    auto* analyze = app.add_subcommand(
        "analyze", "run the full pipeline on a connection-record CSV");
    analyze->add_option("--input", analyze_args.input, "connection-record CSV")
        ->required();
    analyze
        ->add_option("--snapshot", analyze_args.snapshot,
                     "country/ASN snapshot CSV for enrichment")
        ->envname("IBRKIT_SNAPSHOT");
    analyze
        ->add_option("--enrich-policy", analyze_args.enrich_policy,
                     "fill (only missing fields) or override (snapshot wins)")
        ->capture_default_str();
    analyze
        ->add_option("--scan-threshold", analyze_args.scan_threshold,
                     "distinct ports per source to flag a scanner")
        ->capture_default_str();
    analyze
        ->add_option("--burst-volume", analyze_args.burst_volume,
                     "packets over the window for a high-volume ASN")
        ->capture_default_str();
    analyze
        ->add_option("--burst-activity", analyze_args.burst_activity,
                     "active-hour fraction splitting persistent from bursty")
        ->capture_default_str();
    analyze
        ->add_option("--percentiles", analyze_args.percentiles,
                     "comma-separated top shares for the percentile table")
        ->capture_default_str();
    analyze->add_option("--risk-registry", analyze_args.risk_registry,
                        "Port,Label,Risk CSV replacing the builtin registry");
    analyze->add_option("--out", analyze_args.out_dir, "report directory")
        ->capture_default_str();
    analyze->add_option("--format", analyze_args.format, "json or csv (bundle)")
        ->capture_default_str();
    analyze
        ->add_option("--entropy-weight", analyze_args.entropy_weight,
                     "packets or records")
        ->capture_default_str();
    analyze->add_option("--workers", analyze_args.workers, "analysis worker threads")
        ->capture_default_str();
    analyze
        ->add_option("--chunk-size", analyze_args.chunk_size,
                     "ingest read chunk in bytes")
        ->capture_default_str();
    analyze->add_option("--rejects", analyze_args.rejects,
                        "spool rejected rows to this file");
    analyze->add_option("--ground-truth", analyze_args.ground_truth,
                        "synth sidecar for closed-loop precision/recall");
    analyze->add_option("--top", analyze_args.top, "rows per top table")
        ->capture_default_str();
    analyze
        ->add_option("--hourly-series", analyze_args.hourly_series,
                     "ASN columns in the hourly volume table")
        ->capture_default_str();
    analyze
        ->add_option("--lorenz-points", analyze_args.lorenz_points,
                     "max lorenz points kept in the report")
        ->capture_default_str();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand(
        "synth", "generate a labeled synthetic corpus from a JSON config");
    synth->add_option("--config", synth_args.config, "synth config JSON")->required();
    synth->add_option("--out", synth_args.out_dir, "output directory")
        ->capture_default_str();
    auto* seed_opt =
        synth->add_option("--seed", synth_args.seed, "override the config seed");

    ValidateArgs validate_args;
    auto* validate = app.add_subcommand(
        "validate", "ingest-only pass printing the cleaning report");
    validate->add_option("--input", validate_args.input, "connection-record CSV")
        ->required();
    validate
        ->add_option("--chunk-size", validate_args.chunk_size,
                     "ingest read chunk in bytes")
        ->capture_default_str();
    validate->add_option("--rejects", validate_args.rejects,
                         "spool rejected rows to this file");

    ConvertArgs convert_args;
    auto* convert = app.add_subcommand(
        "report-convert", "re-render an existing report.json");
    convert->add_option("--report", convert_args.report, "path to report.json")
        ->required();
    convert->add_option("--series", convert_args.series,
                        "plot series to extract (see docs) to csv");
    convert->add_option("--format", convert_args.format,
                        "rewrite as json or csv bundle into --out");
    convert->add_option("--out", convert_args.out, "output file (series) or directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (app.got_subcommand(analyze)) return cmd_analyze(analyze_args);
        if (app.got_subcommand(synth)) {
            synth_args.seed_set = seed_opt->count() > 0;
            return cmd_synth(synth_args);
        }
        if (app.got_subcommand(validate)) return cmd_validate(validate_args);
        if (app.got_subcommand(convert)) return cmd_report_convert(convert_args);
        throw usage_error("no subcommand given");
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
