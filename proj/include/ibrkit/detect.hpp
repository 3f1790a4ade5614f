#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "ibrkit/metrics.hpp"
#include "ibrkit/record.hpp"

namespace ibrkit {

// Per-source behavior over the whole observation window. Partial profiles
// merge commutatively, so workers can build them independently.
struct SourceProfile {
    Ipv4 source_ip;
    std::set<uint16_t> ports;
    uint64_t total_packets = 0;
    uint64_t total_records = 0;
    std::set<int64_t> active_hours;  // hour buckets of record first timestamps
    bool zmap = false;
    bool masscan = false;
    bool mirai = false;

    uint64_t distinct_ports() const { return ports.size(); }

    void add(const ConnectionRecord& record);
    void merge(const SourceProfile& other);

    bool operator==(const SourceProfile&) const = default;
};

using ProfileMap = std::map<Ipv4, SourceProfile>;

ProfileMap build_profiles(const std::vector<ConnectionRecord>& records);
void add_to_profiles(ProfileMap& profiles, const ConnectionRecord& record);
void merge_profiles(ProfileMap& into, const ProfileMap& other);

// Sources touching at least `threshold` distinct destination ports. Ascending
// by IP.
std::vector<Ipv4> detect_scanners(const ProfileMap& profiles, uint64_t threshold = 5);

// Which TCP flag combinations count as backscatter (a victim answering probes
// it never initiated). Total over all 64 subsets of the six classic flags.
struct BackscatterTable {
    std::array<bool, 64> combos{};

    bool matches(TcpFlags flags) const { return combos[flags.bits & 0x3f]; }

    // SYN-ACK, RST-ACK, RST, ACK: reply-shaped traffic.
    static const BackscatterTable& standard();
};

enum class BackscatterClass { backscatter, not_backscatter, unclassified };

// Only TCP records with flag evidence are candidates; TCP without flags is
// unclassified, everything else (including ICMP) is a deterministic no.
BackscatterClass classify_backscatter(const ConnectionRecord& record,
                                      const BackscatterTable& table =
                                          BackscatterTable::standard());

struct BackscatterScan {
    std::vector<uint64_t> record_indices;  // ascending
    uint64_t backscatter_packets = 0;
    uint64_t unclassified_records = 0;  // TCP records lacking tcp_flags
    uint64_t candidate_records = 0;     // TCP records carrying tcp_flags

    bool operator==(const BackscatterScan&) const = default;
};

BackscatterScan detect_backscatter(const std::vector<ConnectionRecord>& records,
                                   const BackscatterTable& table =
                                       BackscatterTable::standard());

struct FingerprintTally {
    uint64_t zmap_records = 0;
    uint64_t zmap_packets = 0;
    uint64_t masscan_records = 0;
    uint64_t masscan_packets = 0;
    uint64_t mirai_records = 0;
    uint64_t mirai_packets = 0;

    void add(const ConnectionRecord& record);
    void merge(const FingerprintTally& other);

    bool operator==(const FingerprintTally&) const = default;
};

FingerprintTally tally_fingerprints(const std::vector<ConnectionRecord>& records);

struct DetectionLabels {
    std::vector<Ipv4> scanners;
    BackscatterScan backscatter;
    FingerprintTally fingerprint_counts;
    uint64_t scan_threshold_used = 5;
};

DetectionLabels run_detection(const std::vector<ConnectionRecord>& records,
                              uint64_t scan_threshold = 5,
                              const BackscatterTable& table =
                                  BackscatterTable::standard());

}  // namespace ibrkit
