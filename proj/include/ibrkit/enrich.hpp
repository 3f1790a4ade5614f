#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ibrkit/ipv4.hpp"
#include "ibrkit/record.hpp"

namespace ibrkit {

struct SnapshotEntry {
    Cidr prefix;
    std::string country;
    uint32_t asn = 0;
    std::string org;
};

// Offline prefix-to-origin index. Longest-prefix-match over unique
// (network, length) keys, so lookups have a single deterministic answer.
class EnrichmentSnapshot {
public:
    void add(SnapshotEntry entry);  // throws on duplicate prefix

    // Longest matching entry, or nullptr when nothing contains ip.
    const SnapshotEntry* lookup(Ipv4 ip) const;

    size_t size() const { return entries_.size(); }
    const std::vector<SnapshotEntry>& entries() const { return entries_; }

    // First '#' comment line of the source file, without the marker. The
    // snapshot format reserves it for provenance notes (date, tool).
    std::string metadata;

private:
    std::vector<SnapshotEntry> entries_;
    // One exact-match table per prefix length; probe from longest to shortest.
    std::array<std::unordered_map<uint32_t, size_t>, 33> by_length_;
    std::vector<uint8_t> lengths_desc_;
};

// Snapshot file: CSV with header "Prefix,Country,ASN,Org"; '#' lines ignored.
EnrichmentSnapshot load_snapshot(std::istream& in);
EnrichmentSnapshot load_snapshot(const std::string& path);

// "override" is taken by the language; the CLI spells this pair fill/override.
enum class EnrichPolicy { fill_missing, override_embedded };

std::optional<EnrichPolicy> parse_enrich_policy(std::string_view text);
std::string_view to_string(EnrichPolicy policy);

// Counter block for one enrichment run. Field-level events; a record can
// contribute to several counters. Mergeable across workers.
struct EnrichmentTally {
    uint64_t records = 0;
    uint64_t snapshot_hits = 0;
    uint64_t filled_country = 0;    // unknown marker replaced by snapshot value
    uint64_t filled_asn = 0;
    uint64_t overridden_country = 0;  // embedded value changed by override policy
    uint64_t overridden_asn = 0;
    uint64_t unknown_country_after = 0;
    uint64_t unknown_asn_after = 0;

    void merge(const EnrichmentTally& other);
    bool operator==(const EnrichmentTally&) const = default;
};

// Applies one snapshot lookup to one record. fill_missing touches only
// unknown-marker fields; override_embedded replaces country/asn/org on every
// snapshot hit and keeps embedded values on a miss. Org travels with asn.
void enrich_record(ConnectionRecord& record, const EnrichmentSnapshot& snapshot,
                   EnrichPolicy policy, EnrichmentTally& tally);

std::pair<std::vector<ConnectionRecord>, EnrichmentTally> enrich_records(
    std::vector<ConnectionRecord> records, const EnrichmentSnapshot& snapshot,
    EnrichPolicy policy);

}  // namespace ibrkit
