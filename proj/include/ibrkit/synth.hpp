#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ibrkit/metrics.hpp"
#include "ibrkit/record.hpp"

namespace ibrkit {

enum class CampaignKind {
    persistent_scanner,   // few sources, >=5 ports, active every hour
    bursty_spike,         // one ASN, one hour, huge volume
    coordinated_surge,    // many sources/ASNs/ports in one terminal hour
    backscatter_victim,   // reply-flagged records (SA/RA) at random hours
    background_noise,     // heavy-tailed ambient scanning
};

std::optional<CampaignKind> parse_campaign_kind(std::string_view text);
std::string_view to_string(CampaignKind kind);

struct CampaignSpec {
    CampaignKind kind = CampaignKind::background_noise;
    uint64_t sources = 0;

    // persistent_scanner: probed every hour by every source; needs >= 5
    // entries for the sources to be scanner plants. bursty_spike: the single
    // hammered port (defaults to 5555).
    std::vector<uint16_t> ports;
    uint64_t packets_per_hour = 0;  // persistent_scanner, per source

    int64_t spike_hour = -1;        // bursty_spike / coordinated_surge
    uint64_t spike_packets = 0;     // bursty_spike, per source, single record

    uint64_t packets_per_record = 0;  // coordinated_surge / backscatter_victim
    uint32_t port_pool = 0;           // coordinated_surge: distinct ports drawn from
    uint32_t ports_per_source = 0;    // coordinated_surge: <= 4 so no scanner plants

    uint64_t records_per_source = 0;  // backscatter_victim

    uint32_t asn = 0;       // planted ASN (persistent_scanner, bursty_spike)
    uint32_t asn_base = 0;  // coordinated_surge: source i gets asn_base + i
    std::string country;    // planted country code, pool-assigned when empty
};

struct SynthConfig {
    uint64_t seed = 1;
    uint64_t window_hours = 240;
    int64_t window_start_epoch = 1736380800;  // must be hour-aligned
    double target_top1pct_share = 0.81;
    // When nonzero, background record counts are adjusted so the corpus has
    // exactly this many rows.
    uint64_t target_records = 0;
    std::vector<CampaignSpec> campaigns;

    // background volume model: truncated Pareto, then calibrated to the
    // target concentration
    double pareto_alpha = 1.2;
    uint64_t pareto_min = 8;
    uint64_t pareto_cap = 200000;
    uint32_t background_asn_pool = 150;
};

// Reads the JSON config shape documented in the README; throws
// Error(input_format) on structural or semantic problems.
SynthConfig load_synth_config(std::istream& in);
SynthConfig load_synth_config(const std::string& path);
void validate_config(const SynthConfig& config);

std::string config_to_json(const SynthConfig& config);  // canonical echo

struct GroundTruth {
    std::vector<Ipv4> scanner_sources;             // ascending
    std::vector<uint64_t> backscatter_record_ids;  // ascending emission index
    std::map<uint32_t, BurstinessLabel> asn_class;
    std::map<Ipv4, uint64_t> per_source_volume;
    uint64_t records_emitted = 0;
    uint64_t packets_emitted = 0;
};

// Streams one record at a time; the corpus is never materialized.
using RecordSink = std::function<void(const ConnectionRecord&)>;

// Deterministic for a given config (the seed lives inside it). Every emitted
// record is checked against the record-model invariants; planted ASN classes
// are verified against the emitted aggregates before returning.
GroundTruth generate(const SynthConfig& config, const RecordSink& sink);

// CSV corpus to `corpus_out` in the exact format ingest consumes.
GroundTruth generate_csv(const SynthConfig& config, std::ostream& corpus_out);

// In-memory convenience for tests and small corpora.
std::pair<std::vector<ConnectionRecord>, GroundTruth> generate_records(
    const SynthConfig& config);

// Sidecar JSON: generator identity (algorithm + seed), config echo, and the
// ground truth itself.
void write_ground_truth(std::ostream& out, const GroundTruth& truth,
                        const SynthConfig& config);
GroundTruth load_ground_truth(std::istream& in);

}  // namespace ibrkit
