#include "ibrkit/enrich.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>

#include "ibrkit/csv.hpp"
#include "ibrkit/errors.hpp"

namespace ibrkit {

void EnrichmentSnapshot::add(SnapshotEntry entry) {
    auto& table = by_length_[entry.prefix.length];
    uint32_t key = entry.prefix.network;
    if (table.count(key)) {
        throw input_error("duplicate_prefix: " + format_cidr(entry.prefix));
    }
    if (table.empty()) {
        lengths_desc_.push_back(entry.prefix.length);
        std::sort(lengths_desc_.rbegin(), lengths_desc_.rend());
    }
    table.emplace(key, entries_.size());
    entries_.push_back(std::move(entry));
}

const SnapshotEntry* EnrichmentSnapshot::lookup(Ipv4 ip) const {
    for (uint8_t length : lengths_desc_) {
        uint32_t key = ip.value & prefix_mask(length);
        auto& table = by_length_[length];
        auto it = table.find(key);
        if (it != table.end()) return &entries_[it->second];
    }
    return nullptr;
}

EnrichmentSnapshot load_snapshot(std::istream& in) {
    CsvReader reader(in);
    EnrichmentSnapshot snapshot;
    std::vector<std::string> fields;
    std::string error;
    bool header_seen = false;
    for (;;) {
        auto status = reader.next_row(fields, error);
        if (status == CsvReader::RowStatus::end) break;
        if (status == CsvReader::RowStatus::malformed) {
            throw input_error("malformed snapshot row: " + error);
        }
        if (!fields.empty() && !fields[0].empty() && fields[0][0] == '#') {
            if (snapshot.metadata.empty()) {
                std::string_view note(fields[0]);
                note.remove_prefix(1);
                while (!note.empty() && note.front() == ' ') note.remove_prefix(1);
                snapshot.metadata = std::string(note);
            }
            continue;
        }
        if (!header_seen) {
            const std::vector<std::string> expected = {"Prefix", "Country", "ASN", "Org"};
            if (fields != expected) {
                throw input_error("snapshot header must be Prefix,Country,ASN,Org");
            }
            header_seen = true;
            continue;
        }
        if (fields.size() != 4) {
            throw input_error("snapshot row needs 4 fields, got " +
                              std::to_string(fields.size()));
        }
        auto cidr = parse_cidr(fields[0]);
        if (!cidr) throw input_error("malformed_cidr: " + fields[0]);
        uint64_t asn = 0;
        const std::string& asn_text = fields[2];
        auto [ptr, ec] = std::from_chars(asn_text.data(), asn_text.data() + asn_text.size(), asn);
        if (ec != std::errc{} || ptr != asn_text.data() + asn_text.size() ||
            asn > 0xffffffffull) {
            throw input_error("malformed snapshot ASN: " + asn_text);
        }
        snapshot.add({*cidr, fields[1], static_cast<uint32_t>(asn), fields[3]});
    }
    if (!header_seen) throw input_error("snapshot has no header row");
    return snapshot;
}

EnrichmentSnapshot load_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open snapshot file: " + path);
    return load_snapshot(in);
}

std::optional<EnrichPolicy> parse_enrich_policy(std::string_view text) {
    if (text == "fill") return EnrichPolicy::fill_missing;
    if (text == "override") return EnrichPolicy::override_embedded;
    return std::nullopt;
}

std::string_view to_string(EnrichPolicy policy) {
    return policy == EnrichPolicy::fill_missing ? "fill" : "override";
}

void EnrichmentTally::merge(const EnrichmentTally& other) {
    records += other.records;
    snapshot_hits += other.snapshot_hits;
    filled_country += other.filled_country;
    filled_asn += other.filled_asn;
    overridden_country += other.overridden_country;
    overridden_asn += other.overridden_asn;
    unknown_country_after += other.unknown_country_after;
    unknown_asn_after += other.unknown_asn_after;
}

void enrich_record(ConnectionRecord& record, const EnrichmentSnapshot& snapshot,
                   EnrichPolicy policy, EnrichmentTally& tally) {
    ++tally.records;
    const SnapshotEntry* hit = snapshot.lookup(record.source_ip);
    if (hit) {
        ++tally.snapshot_hits;
        bool country_unknown = record.country == kUnknownCountry;
        bool asn_unknown = record.asn == kUnknownAsn;
        if (country_unknown) {
            record.country = hit->country;
            ++tally.filled_country;
        } else if (policy == EnrichPolicy::override_embedded &&
                   record.country != hit->country) {
            record.country = hit->country;
            ++tally.overridden_country;
        }
        if (asn_unknown) {
            record.asn = hit->asn;
            record.org = hit->org;
            ++tally.filled_asn;
        } else if (policy == EnrichPolicy::override_embedded && record.asn != hit->asn) {
            record.asn = hit->asn;
            record.org = hit->org;
            ++tally.overridden_asn;
        }
    }
    if (record.country == kUnknownCountry) ++tally.unknown_country_after;
    if (record.asn == kUnknownAsn) ++tally.unknown_asn_after;
}

std::pair<std::vector<ConnectionRecord>, EnrichmentTally> enrich_records(
    std::vector<ConnectionRecord> records, const EnrichmentSnapshot& snapshot,
    EnrichPolicy policy) {
    EnrichmentTally tally;
    for (auto& record : records) enrich_record(record, snapshot, policy, tally);
    return {std::move(records), tally};
}

}  // namespace ibrkit
