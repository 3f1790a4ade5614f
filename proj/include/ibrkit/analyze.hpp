#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "ibrkit/enrich.hpp"
#include "ibrkit/metrics.hpp"
#include "ibrkit/report.hpp"
#include "ibrkit/synth.hpp"

namespace ibrkit {

inline constexpr const char* kToolVersion = "0.1.0";

struct AnalyzeOptions {
    const EnrichmentSnapshot* snapshot = nullptr;  // no enrichment when null
    EnrichPolicy enrich_policy = EnrichPolicy::fill_missing;
    uint64_t scan_threshold = 5;
    BurstinessThresholds burst;
    std::vector<double> percentiles = {0.01, 0.05, 0.10};
    PortRiskRegistry registry = PortRiskRegistry::standard();
    EntropyWeight entropy_weight = EntropyWeight::packets;
    size_t workers = 1;       // result is worker-count invariant
    size_t chunk_size = 64 * 1024;
    std::string rejects_path;
    size_t top_table_size = 10;
    size_t hourly_asn_series = 5;
    size_t lorenz_max_points = 512;
    const GroundTruth* ground_truth = nullptr;  // closed-loop eval when set
    // effective settings, echoed verbatim into run metadata
    std::vector<std::pair<std::string, std::string>> config_echo;
    std::string input_label;

    // stats the report does not carry; readable after a run
    mutable EnrichmentTally enrichment;
};

// Single pass over the input; memory is bounded by the aggregate state, not
// the file size. Throws Error(input_format) when nothing is retained.
AnalysisReport analyze_stream(std::istream& in, const AnalyzeOptions& options);
AnalysisReport analyze_file(const std::string& path, const AnalyzeOptions& options);

// precision/recall of the detector outputs against a generator sidecar;
// burstiness rows are matched per planted ASN by label
GroundTruthEval evaluate_ground_truth(const GroundTruth& truth,
                                      const std::vector<Ipv4>& scanners,
                                      const std::vector<uint64_t>& backscatter_ids,
                                      const std::vector<AsnActivity>& burstiness);

}  // namespace ibrkit
