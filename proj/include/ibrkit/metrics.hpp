#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ibrkit/ipv4.hpp"
#include "ibrkit/record.hpp"

namespace ibrkit {

inline constexpr int64_t kSecondsPerHour = 3600;

// Floor division, so pre-1970 timestamps land in the right bucket too.
constexpr int64_t hour_bucket(int64_t epoch_seconds) {
    int64_t q = epoch_seconds / kSecondsPerHour;
    return (epoch_seconds % kSecondsPerHour < 0) ? q - 1 : q;
}

// Neumaier-compensated accumulator. Used for every cumulative statistic so
// results stay stable at corpus scale and identical across merge layouts.
class NeumaierSum {
public:
    void add(double x) {
        double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct LorenzResult {
    // (cumulative population share, cumulative volume share), ascending by
    // volume; starts at (0,0), ends at (1,1).
    std::vector<std::pair<double, double>> points;
    double gini = 0.0;
};

// Sorted-rank Gini over the ascending sort with 1-based ranks:
// G = (2 * sum(i * x_i)) / (n * sum(x)) - (n + 1) / n.
LorenzResult lorenz_gini(std::vector<double> volumes);

struct PercentileRow {
    double percentile = 0.0;
    uint64_t ip_count = 0;
    uint64_t packet_volume = 0;
    double cumulative_share = 0.0;

    bool operator==(const PercentileRow&) const = default;
};

struct PercentileTable {
    std::vector<PercentileRow> rows;  // ascending by percentile
};

// Sources ranked by volume descending (ties by ascending IP); each row keeps
// the top ceil(p * n) sources. Requested percentiles are sorted and deduped.
PercentileTable percentile_table(const std::map<Ipv4, uint64_t>& per_source_volume,
                                 std::vector<double> percentiles);

// H = -sum(p_i * log2(p_i)). Computed as log2(T) - sum(c * log2(c)) / T so
// uniform power-of-two distributions come out exact. Zero counts are ignored.
double shannon_entropy(const std::vector<uint64_t>& counts);

enum class EntropyWeight { packets, records };

struct HourWindow {
    int64_t first_hour = 0;
    int64_t last_hour = -1;  // empty when last < first

    bool empty() const { return last_hour < first_hour; }
    uint64_t hours() const {
        return empty() ? 0 : static_cast<uint64_t>(last_hour - first_hour + 1);
    }
    void include(int64_t hour) {
        if (empty()) {
            first_hour = last_hour = hour;
        } else {
            first_hour = std::min(first_hour, hour);
            last_hour = std::max(last_hour, hour);
        }
    }
    void merge(const HourWindow& other) {
        if (other.empty()) return;
        include(other.first_hour);
        include(other.last_hour);
    }

    bool operator==(const HourWindow&) const = default;
};

HourWindow window_of(const std::vector<ConnectionRecord>& records);

struct EntropyRow {
    int64_t hour = 0;  // absolute hour bucket
    uint64_t total_packets = 0;
    uint64_t total_records = 0;
    uint64_t distinct_ports = 0;
    uint64_t distinct_asns = 0;
    double raw_port_entropy = 0.0;
    double raw_asn_entropy = 0.0;
    double norm_port_entropy = 0.0;  // raw / log2(distinct), 0 when distinct < 2
    double norm_asn_entropy = 0.0;

    bool operator==(const EntropyRow&) const = default;
};

struct EntropySeries {
    std::vector<EntropyRow> rows;  // one per hour in the window, gaps included
    HourWindow window;

    bool operator==(const EntropySeries&) const = default;
};

// Per-hour integer aggregation: all merges are exact, all doubles are
// computed once at finalization over sort-ordered keys, so any partition of
// the input into accumulators finalizes to bit-identical series.
class HourlyAccumulator {
public:
    struct Weighted {
        uint64_t packets = 0;
        uint64_t records = 0;
    };
    struct HourCell {
        std::unordered_map<uint16_t, Weighted> by_port;
        std::unordered_map<uint32_t, Weighted> by_asn;
        uint64_t packets = 0;
        uint64_t records = 0;
    };

    void add(const ConnectionRecord& record);
    void merge(const HourlyAccumulator& other);

    EntropySeries finalize(EntropyWeight weight = EntropyWeight::packets) const;
    // Window override for corpora whose nominal window is wider than the data.
    EntropySeries finalize(HourWindow window, EntropyWeight weight) const;

    const std::map<int64_t, HourCell>& cells() const { return cells_; }
    HourWindow window() const { return window_; }

private:
    std::map<int64_t, HourCell> cells_;
    HourWindow window_;
};

EntropySeries entropy_series(const std::vector<ConnectionRecord>& records,
                             EntropyWeight weight = EntropyWeight::packets);

enum class BurstinessLabel { persistent_high, bursty_high, episodic_minor, background };

std::string_view to_string(BurstinessLabel label);
std::optional<BurstinessLabel> parse_burstiness_label(std::string_view name);

struct BurstinessThresholds {
    uint64_t volume_high = 1000000;  // packets over the whole window
    double activity = 0.5;           // fraction of window hours with traffic
};

// Volume and temporal-consistency decision table:
//   high volume, high activity  -> persistent_high
//   high volume, low activity   -> bursty_high
//   low volume, low activity    -> episodic_minor
//   low volume, high activity   -> background
BurstinessLabel classify_one(uint64_t total_packets, double activity_ratio,
                             const BurstinessThresholds& thresholds);

struct AsnActivity {
    uint32_t asn = 0;
    uint64_t total_packets = 0;
    uint64_t active_hours = 0;
    double activity_ratio = 0.0;
    BurstinessLabel label = BurstinessLabel::background;

    bool operator==(const AsnActivity&) const = default;
};

// Rows ordered by total_packets descending, ties by ascending ASN.
std::vector<AsnActivity> classify_burstiness(const HourlyAccumulator& hours,
                                             HourWindow window,
                                             const BurstinessThresholds& thresholds);
std::vector<AsnActivity> classify_burstiness(const std::vector<ConnectionRecord>& records,
                                             const BurstinessThresholds& thresholds);

// Descending by packets, ties by ascending key; at most n rows.
template <typename Map>
std::vector<std::pair<typename Map::key_type, uint64_t>> top_n(const Map& groups,
                                                               size_t n) {
    std::vector<std::pair<typename Map::key_type, uint64_t>> rows(groups.begin(),
                                                                  groups.end());
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (rows.size() > n) rows.resize(n);
    return rows;
}

}  // namespace ibrkit
