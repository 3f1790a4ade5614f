// _ibrkit: python bindings over the analysis core. Reports cross the
// boundary as JSON text; the package wrapper turns them into dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ibrkit/analyze.hpp"
#include "ibrkit/enrich.hpp"
#include "ibrkit/errors.hpp"
#include "ibrkit/ingest.hpp"
#include "ibrkit/metrics.hpp"
#include "ibrkit/report.hpp"
#include "ibrkit/synth.hpp"

namespace py = pybind11;
using namespace ibrkit;

namespace {

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::string analyze_file_json(const std::string& input, const std::string& snapshot,
                              const std::string& enrich_policy, uint64_t scan_threshold,
                              uint64_t burst_volume, double burst_activity,
                              std::vector<double> percentiles,
                              const std::string& risk_registry,
                              const std::string& entropy_weight, size_t workers,
                              size_t chunk_size, size_t top, size_t hourly_series,
                              size_t lorenz_points, const std::string& ground_truth) {
    AnalyzeOptions options;

    auto policy = parse_enrich_policy(enrich_policy);
    if (!policy) throw usage_error("enrich_policy must be fill or override");
    options.enrich_policy = *policy;
    if (scan_threshold < 1) throw usage_error("scan_threshold must be >= 1");
    options.scan_threshold = scan_threshold;
    options.burst.volume_high = burst_volume;
    if (burst_activity < 0.0 || burst_activity > 1.0) {
        throw usage_error("burst_activity must be within [0, 1]");
    }
    options.burst.activity = burst_activity;
    if (percentiles.empty()) throw usage_error("percentiles must not be empty");
    for (double p : percentiles) {
        if (!(p > 0.0) || p > 1.0) throw usage_error("percentiles must be in (0, 1]");
    }
    options.percentiles = percentiles;
    if (entropy_weight == "packets") {
        options.entropy_weight = EntropyWeight::packets;
    } else if (entropy_weight == "records") {
        options.entropy_weight = EntropyWeight::records;
    } else {
        throw usage_error("entropy_weight must be packets or records");
    }
    if (workers < 1) throw usage_error("workers must be >= 1");
    if (chunk_size < 1) throw usage_error("chunk_size must be >= 1");
    options.workers = workers;
    options.chunk_size = chunk_size;
    options.top_table_size = top;
    options.hourly_asn_series = hourly_series;
    options.lorenz_max_points = lorenz_points;

    EnrichmentSnapshot snap;
    if (!snapshot.empty()) {
        snap = load_snapshot(snapshot);
        options.snapshot = &snap;
    }
    if (!risk_registry.empty()) {
        options.registry = load_port_risk_registry(risk_registry);
    }
    GroundTruth truth;
    if (!ground_truth.empty()) {
        std::ifstream in(ground_truth, std::ios::binary);
        if (!in) throw io_error("cannot open ground truth: " + ground_truth);
        truth = load_ground_truth(in);
        options.ground_truth = &truth;
    }

    // same echo keys as the CLI; output plumbing and worker counts stay out
    // so identical analyses serialize identically
    options.config_echo = {
        {"input", input},
        {"snapshot", snapshot},
        {"enrich_policy", enrich_policy},
        {"scan_threshold", std::to_string(scan_threshold)},
        {"burst_volume", std::to_string(burst_volume)},
        {"burst_activity", format_double(burst_activity)},
        {"percentiles", join_doubles(percentiles)},
        {"risk_registry", risk_registry.empty() ? "builtin" : risk_registry},
        {"entropy_weight", entropy_weight},
        {"top_tables", std::to_string(top)},
        {"hourly_asn_series", std::to_string(hourly_series)},
        {"lorenz_max_points", std::to_string(lorenz_points)},
        {"ground_truth", ground_truth},
    };

    AnalysisReport report;
    {
        py::gil_scoped_release release;
        report = analyze_file(input, options);
    }
    return report_to_json(report);
}

py::dict validate_file(const std::string& input, size_t chunk_size) {
    std::ifstream in(input, std::ios::binary);
    if (!in) throw io_error("cannot open input: " + input);
    IngestOptions options;
    options.chunk_size = chunk_size;
    RecordReader reader(in, options);
    {
        py::gil_scoped_release release;
        while (reader.next()) {
        }
    }
    const auto& report = reader.report();
    py::dict rejected;
    for (const auto& [reason, count] : report.rejected_by_reason) {
        rejected[py::str(std::string(to_string(reason)))] = count;
    }
    py::dict out;
    out["rows_read"] = report.rows_read;
    out["rows_retained"] = report.rows_retained;
    out["rejected_total"] = report.rejected_total();
    out["rejected"] = rejected;
    out["conserves"] = report.conserves();
    out["digest"] = reader.digest_hex();
    return out;
}

py::dict synth_files(const std::string& config_json, const std::string& out_dir) {
    std::istringstream config_in(config_json);
    auto config = load_synth_config(config_in);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw io_error("cannot create " + out_dir + ": " + ec.message());
    auto corpus_path = (std::filesystem::path(out_dir) / "corpus.csv").string();
    auto truth_path = (std::filesystem::path(out_dir) / "ground_truth.json").string();

    GroundTruth truth;
    {
        py::gil_scoped_release release;
        std::ofstream corpus(corpus_path, std::ios::binary);
        if (!corpus) throw io_error("cannot open " + corpus_path + " for writing");
        truth = generate_csv(config, corpus);
        corpus.flush();
        if (!corpus) throw io_error("short write to " + corpus_path);
        std::ofstream sidecar(truth_path, std::ios::binary);
        if (!sidecar) throw io_error("cannot open " + truth_path + " for writing");
        write_ground_truth(sidecar, truth, config);
        sidecar.flush();
        if (!sidecar) throw io_error("short write to " + truth_path);
    }

    py::dict out;
    out["corpus"] = corpus_path;
    out["ground_truth"] = truth_path;
    out["seed"] = config.seed;
    out["records"] = truth.records_emitted;
    out["packets"] = truth.packets_emitted;
    out["scanners"] = truth.scanner_sources.size();
    out["backscatter_records"] = truth.backscatter_record_ids.size();
    out["labeled_asns"] = truth.asn_class.size();
    return out;
}

py::tuple synth_strings(const std::string& config_json) {
    std::istringstream config_in(config_json);
    auto config = load_synth_config(config_in);
    std::ostringstream corpus;
    GroundTruth truth;
    {
        py::gil_scoped_release release;
        truth = generate_csv(config, corpus);
    }
    std::ostringstream sidecar;
    write_ground_truth(sidecar, truth, config);
    return py::make_tuple(corpus.str(), sidecar.str());
}

}  // namespace

PYBIND11_MODULE(_ibrkit, m) {
    m.doc() = "darknet traffic analysis core";
    m.attr("__version__") = kToolVersion;

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::io) {
                PyErr_SetString(PyExc_OSError, e.what());
            } else {
                PyErr_SetString(PyExc_ValueError, e.what());
            }
        }
    });

    m.def("analyze_file_json", &analyze_file_json, py::arg("input"),
          py::arg("snapshot") = "", py::arg("enrich_policy") = "fill",
          py::arg("scan_threshold") = 5, py::arg("burst_volume") = 1000000,
          py::arg("burst_activity") = 0.5,
          py::arg("percentiles") = std::vector<double>{0.01, 0.05, 0.10},
          py::arg("risk_registry") = "", py::arg("entropy_weight") = "packets",
          py::arg("workers") = 1, py::arg("chunk_size") = 64 * 1024,
          py::arg("top") = 10, py::arg("hourly_series") = 5,
          py::arg("lorenz_points") = 512, py::arg("ground_truth") = "",
          "Full pipeline over a connection-record CSV; returns the report as "
          "JSON text.");
    m.def("validate_file", &validate_file, py::arg("input"),
          py::arg("chunk_size") = 64 * 1024,
          "Ingest-only pass; returns the cleaning report as a dict.");
    m.def("synth_files", &synth_files, py::arg("config_json"), py::arg("out_dir"),
          "Generate corpus.csv and ground_truth.json under out_dir from a config "
          "JSON string.");
    m.def("synth_strings", &synth_strings, py::arg("config_json"),
          "Generate (corpus_csv, ground_truth_json) in memory.");
    m.def(
        "gini",
        [](std::vector<double> volumes) { return lorenz_gini(std::move(volumes)).gini; },
        py::arg("volumes"), "Gini coefficient of a volume vector.");
    m.def(
        "lorenz",
        [](std::vector<double> volumes) {
            return lorenz_gini(std::move(volumes)).points;
        },
        py::arg("volumes"),
        "Lorenz curve points (cumulative population share, cumulative volume "
        "share).");
    m.def("shannon_entropy", &shannon_entropy, py::arg("counts"),
          "Shannon entropy in bits of a count vector.");
    m.def(
        "plot_series_csv",
        [](const std::string& report_json, const std::string& which) {
            return plot_series(report_from_json(report_json), which).to_csv();
        },
        py::arg("report_json"), py::arg("which"),
        "Extract one plot-ready series from report JSON as CSV text.");
    m.def(
        "plot_series_names", [] { return plot_series_names(); },
        "Known plot series names.");
    m.def(
        "write_report_files",
        [](const std::string& report_json, const std::string& format,
           const std::string& out_dir) {
            auto parsed_format = parse_report_format(format);
            if (!parsed_format) throw usage_error("format must be json or csv");
            write_report(report_from_json(report_json), *parsed_format, out_dir);
        },
        py::arg("report_json"), py::arg("format"), py::arg("out_dir"),
        "Write report JSON back to disk as report.json or the csv bundle.");
}
