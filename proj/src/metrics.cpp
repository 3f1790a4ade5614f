#include "ibrkit/metrics.hpp"

#include <cmath>

#include "ibrkit/errors.hpp"

namespace ibrkit {

namespace {

// log2 over a positive integer; exact for powers of two.
double log2_u64(uint64_t v) { return std::log2(static_cast<double>(v)); }

}  // namespace

LorenzResult lorenz_gini(std::vector<double> volumes) {
    if (volumes.empty()) throw input_error("lorenz_gini: empty input");
    std::sort(volumes.begin(), volumes.end());
    if (volumes.front() < 0.0) throw input_error("lorenz_gini: negative volume");
    if (volumes.back() <= 0.0) throw input_error("lorenz_gini: all volumes zero");

    size_t n = volumes.size();
    NeumaierSum total;
    for (double v : volumes) total.add(v);
    double sum = total.value();

    LorenzResult result;
    result.points.reserve(n + 1);
    result.points.emplace_back(0.0, 0.0);
    NeumaierSum cumulative;
    NeumaierSum weighted;  // sum of rank * volume, 1-based ranks
    for (size_t i = 0; i < n; ++i) {
        cumulative.add(volumes[i]);
        weighted.add(static_cast<double>(i + 1) * volumes[i]);
        result.points.emplace_back(static_cast<double>(i + 1) / static_cast<double>(n),
                                   cumulative.value() / sum);
    }
    double nd = static_cast<double>(n);
    result.gini = 2.0 * weighted.value() / (nd * sum) - (nd + 1.0) / nd;
    // FP noise guard; the formula is bounded by construction.
    result.gini = std::clamp(result.gini, 0.0, 1.0);
    return result;
}

PercentileTable percentile_table(const std::map<Ipv4, uint64_t>& per_source_volume,
                                 std::vector<double> percentiles) {
    if (per_source_volume.empty()) throw input_error("percentile_table: empty input");
    for (double p : percentiles) {
        if (!(p > 0.0) || p > 1.0) {
            throw usage_error("percentile out of (0,1]: " + std::to_string(p));
        }
    }
    std::sort(percentiles.begin(), percentiles.end());
    percentiles.erase(std::unique(percentiles.begin(), percentiles.end()),
                      percentiles.end());

    // volume descending, ties by ascending IP (map iteration is already
    // IP-ascending, stable_sort keeps that order within equal volumes)
    std::vector<std::pair<Ipv4, uint64_t>> ranked(per_source_volume.begin(),
                                                  per_source_volume.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });

    uint64_t total = 0;
    for (const auto& [ip, volume] : ranked) total += volume;

    std::vector<uint64_t> cumulative(ranked.size());
    uint64_t running = 0;
    for (size_t i = 0; i < ranked.size(); ++i) {
        running += ranked[i].second;
        cumulative[i] = running;
    }

    PercentileTable table;
    size_t n = ranked.size();
    for (double p : percentiles) {
        // epsilon guard so p*n that is integral in exact arithmetic does not
        // round up from FP noise (e.g. 0.1 * 30)
        auto count = static_cast<uint64_t>(
            std::ceil(p * static_cast<double>(n) - 1e-9));
        count = std::clamp<uint64_t>(count, 1, n);
        uint64_t volume = cumulative[count - 1];
        table.rows.push_back({p, count, volume,
                              static_cast<double>(volume) / static_cast<double>(total)});
    }
    return table;
}

double shannon_entropy(const std::vector<uint64_t>& counts) {
    uint64_t total = 0;
    size_t positive = 0;
    for (uint64_t c : counts) {
        total += c;
        positive += c > 0;
    }
    if (total == 0) throw input_error("shannon_entropy: no positive counts");
    if (positive == 1) return 0.0;
    NeumaierSum weighted_log;  // sum of c * log2(c)
    for (uint64_t c : counts) {
        if (c > 1) weighted_log.add(static_cast<double>(c) * log2_u64(c));
    }
    double h = log2_u64(total) - weighted_log.value() / static_cast<double>(total);
    return std::max(h, 0.0);
}

HourWindow window_of(const std::vector<ConnectionRecord>& records) {
    HourWindow window;
    for (const auto& r : records) window.include(hour_bucket(r.first));
    return window;
}

void HourlyAccumulator::add(const ConnectionRecord& record) {
    int64_t hour = hour_bucket(record.first);
    window_.include(hour);
    auto& cell = cells_[hour];
    cell.packets += record.packets;
    cell.records += 1;
    auto& port = cell.by_port[record.port];
    port.packets += record.packets;
    port.records += 1;
    auto& asn = cell.by_asn[record.asn];
    asn.packets += record.packets;
    asn.records += 1;
}

void HourlyAccumulator::merge(const HourlyAccumulator& other) {
    window_.merge(other.window_);
    for (const auto& [hour, cell] : other.cells_) {
        auto& mine = cells_[hour];
        mine.packets += cell.packets;
        mine.records += cell.records;
        for (const auto& [port, w] : cell.by_port) {
            auto& p = mine.by_port[port];
            p.packets += w.packets;
            p.records += w.records;
        }
        for (const auto& [asn, w] : cell.by_asn) {
            auto& a = mine.by_asn[asn];
            a.packets += w.packets;
            a.records += w.records;
        }
    }
}

namespace {

// Extracts weights in ascending key order; hash-map iteration order must not
// leak into any floating-point result.
template <typename K>
std::vector<uint64_t> sorted_counts(
    const std::unordered_map<K, HourlyAccumulator::Weighted>& m, EntropyWeight weight) {
    std::vector<std::pair<K, uint64_t>> items;
    items.reserve(m.size());
    for (const auto& [k, w] : m) {
        items.emplace_back(k, weight == EntropyWeight::packets ? w.packets : w.records);
    }
    std::sort(items.begin(), items.end());
    std::vector<uint64_t> counts;
    counts.reserve(items.size());
    for (const auto& [k, c] : items) counts.push_back(c);
    return counts;
}

double normalize_entropy(double raw, uint64_t distinct) {
    if (distinct < 2) return 0.0;
    double norm = raw / std::log2(static_cast<double>(distinct));
    return std::clamp(norm, 0.0, 1.0);
}

}  // namespace

EntropySeries HourlyAccumulator::finalize(EntropyWeight weight) const {
    return finalize(window_, weight);
}

EntropySeries HourlyAccumulator::finalize(HourWindow window, EntropyWeight weight) const {
    EntropySeries series;
    series.window = window;
    if (window.empty()) return series;
    series.rows.reserve(window.hours());
    for (int64_t hour = window.first_hour; hour <= window.last_hour; ++hour) {
        EntropyRow row;
        row.hour = hour;
        auto it = cells_.find(hour);
        if (it != cells_.end()) {
            const HourCell& cell = it->second;
            row.total_packets = cell.packets;
            row.total_records = cell.records;
            row.distinct_ports = cell.by_port.size();
            row.distinct_asns = cell.by_asn.size();
            row.raw_port_entropy = shannon_entropy(sorted_counts(cell.by_port, weight));
            row.raw_asn_entropy = shannon_entropy(sorted_counts(cell.by_asn, weight));
            row.norm_port_entropy = normalize_entropy(row.raw_port_entropy,
                                                      row.distinct_ports);
            row.norm_asn_entropy = normalize_entropy(row.raw_asn_entropy,
                                                     row.distinct_asns);
        }
        series.rows.push_back(row);
    }
    return series;
}

EntropySeries entropy_series(const std::vector<ConnectionRecord>& records,
                             EntropyWeight weight) {
    HourlyAccumulator acc;
    for (const auto& r : records) acc.add(r);
    return acc.finalize(weight);
}

std::string_view to_string(BurstinessLabel label) {
    switch (label) {
        case BurstinessLabel::persistent_high: return "persistent_high";
        case BurstinessLabel::bursty_high: return "bursty_high";
        case BurstinessLabel::episodic_minor: return "episodic_minor";
        case BurstinessLabel::background: return "background";
    }
    return "background";
}

std::optional<BurstinessLabel> parse_burstiness_label(std::string_view name) {
    if (name == "persistent_high") return BurstinessLabel::persistent_high;
    if (name == "bursty_high") return BurstinessLabel::bursty_high;
    if (name == "episodic_minor") return BurstinessLabel::episodic_minor;
    if (name == "background") return BurstinessLabel::background;
    return std::nullopt;
}

BurstinessLabel classify_one(uint64_t total_packets, double activity_ratio,
                             const BurstinessThresholds& thresholds) {
    bool high_volume = total_packets >= thresholds.volume_high;
    bool high_activity = activity_ratio >= thresholds.activity;
    if (high_volume) {
        return high_activity ? BurstinessLabel::persistent_high
                             : BurstinessLabel::bursty_high;
    }
    return high_activity ? BurstinessLabel::background : BurstinessLabel::episodic_minor;
}

std::vector<AsnActivity> classify_burstiness(const HourlyAccumulator& hours,
                                             HourWindow window,
                                             const BurstinessThresholds& thresholds) {
    std::map<uint32_t, std::pair<uint64_t, uint64_t>> per_asn;  // packets, hours
    for (const auto& [hour, cell] : hours.cells()) {
        (void)hour;
        for (const auto& [asn, w] : cell.by_asn) {
            auto& agg = per_asn[asn];
            agg.first += w.packets;
            agg.second += 1;
        }
    }
    uint64_t window_hours = window.hours();
    std::vector<AsnActivity> rows;
    rows.reserve(per_asn.size());
    for (const auto& [asn, agg] : per_asn) {
        AsnActivity row;
        row.asn = asn;
        row.total_packets = agg.first;
        row.active_hours = agg.second;
        row.activity_ratio = window_hours == 0
                                 ? 0.0
                                 : static_cast<double>(agg.second) /
                                       static_cast<double>(window_hours);
        row.label = classify_one(row.total_packets, row.activity_ratio, thresholds);
        rows.push_back(row);
    }
    std::sort(rows.begin(), rows.end(), [](const AsnActivity& a, const AsnActivity& b) {
        if (a.total_packets != b.total_packets) return a.total_packets > b.total_packets;
        return a.asn < b.asn;
    });
    return rows;
}

std::vector<AsnActivity> classify_burstiness(const std::vector<ConnectionRecord>& records,
                                             const BurstinessThresholds& thresholds) {
    HourlyAccumulator acc;
    for (const auto& r : records) acc.add(r);
    return classify_burstiness(acc, acc.window(), thresholds);
}

}  // namespace ibrkit
