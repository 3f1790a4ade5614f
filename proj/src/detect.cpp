#include "ibrkit/detect.hpp"

namespace ibrkit {

void SourceProfile::add(const ConnectionRecord& record) {
    source_ip = record.source_ip;
    ports.insert(record.port);
    total_packets += record.packets;
    total_records += 1;
    active_hours.insert(hour_bucket(record.first));
    zmap = zmap || record.zmap;
    masscan = masscan || record.masscan;
    mirai = mirai || record.mirai;
}

void SourceProfile::merge(const SourceProfile& other) {
    source_ip = other.source_ip;
    ports.insert(other.ports.begin(), other.ports.end());
    total_packets += other.total_packets;
    total_records += other.total_records;
    active_hours.insert(other.active_hours.begin(), other.active_hours.end());
    zmap = zmap || other.zmap;
    masscan = masscan || other.masscan;
    mirai = mirai || other.mirai;
}

void add_to_profiles(ProfileMap& profiles, const ConnectionRecord& record) {
    profiles[record.source_ip].add(record);
}

ProfileMap build_profiles(const std::vector<ConnectionRecord>& records) {
    ProfileMap profiles;
    for (const auto& r : records) add_to_profiles(profiles, r);
    return profiles;
}

void merge_profiles(ProfileMap& into, const ProfileMap& other) {
    for (const auto& [ip, profile] : other) {
        auto [it, inserted] = into.try_emplace(ip, profile);
        if (!inserted) it->second.merge(profile);
    }
}

std::vector<Ipv4> detect_scanners(const ProfileMap& profiles, uint64_t threshold) {
    std::vector<Ipv4> scanners;
    for (const auto& [ip, profile] : profiles) {
        if (profile.distinct_ports() >= threshold) scanners.push_back(ip);
    }
    return scanners;
}

const BackscatterTable& BackscatterTable::standard() {
    static const BackscatterTable table = [] {
        BackscatterTable t;
        t.combos[TcpFlags::kSyn | TcpFlags::kAck] = true;
        t.combos[TcpFlags::kRst | TcpFlags::kAck] = true;
        t.combos[TcpFlags::kRst] = true;
        t.combos[TcpFlags::kAck] = true;
        return t;
    }();
    return table;
}

BackscatterClass classify_backscatter(const ConnectionRecord& record,
                                      const BackscatterTable& table) {
    if (record.protocol() != ConnectionRecord::Protocol::tcp) {
        return BackscatterClass::not_backscatter;
    }
    if (!record.tcp_flags) return BackscatterClass::unclassified;
    return table.matches(*record.tcp_flags) ? BackscatterClass::backscatter
                                            : BackscatterClass::not_backscatter;
}

BackscatterScan detect_backscatter(const std::vector<ConnectionRecord>& records,
                                   const BackscatterTable& table) {
    BackscatterScan scan;
    for (size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        switch (classify_backscatter(r, table)) {
            case BackscatterClass::backscatter:
                scan.record_indices.push_back(i);
                scan.backscatter_packets += r.packets;
                ++scan.candidate_records;
                break;
            case BackscatterClass::not_backscatter:
                if (r.protocol() == ConnectionRecord::Protocol::tcp) {
                    ++scan.candidate_records;
                }
                break;
            case BackscatterClass::unclassified:
                ++scan.unclassified_records;
                break;
        }
    }
    return scan;
}

void FingerprintTally::add(const ConnectionRecord& record) {
    if (record.zmap) {
        zmap_records += 1;
        zmap_packets += record.packets;
    }
    if (record.masscan) {
        masscan_records += 1;
        masscan_packets += record.packets;
    }
    if (record.mirai) {
        mirai_records += 1;
        mirai_packets += record.packets;
    }
}

void FingerprintTally::merge(const FingerprintTally& other) {
    zmap_records += other.zmap_records;
    zmap_packets += other.zmap_packets;
    masscan_records += other.masscan_records;
    masscan_packets += other.masscan_packets;
    mirai_records += other.mirai_records;
    mirai_packets += other.mirai_packets;
}

FingerprintTally tally_fingerprints(const std::vector<ConnectionRecord>& records) {
    FingerprintTally tally;
    for (const auto& r : records) tally.add(r);
    return tally;
}

DetectionLabels run_detection(const std::vector<ConnectionRecord>& records,
                              uint64_t scan_threshold, const BackscatterTable& table) {
    DetectionLabels labels;
    labels.scan_threshold_used = scan_threshold;
    labels.scanners = detect_scanners(build_profiles(records), scan_threshold);
    labels.backscatter = detect_backscatter(records, table);
    labels.fingerprint_counts = tally_fingerprints(records);
    return labels;
}

}  // namespace ibrkit
