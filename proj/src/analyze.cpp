#include "ibrkit/analyze.hpp"

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "ibrkit/detect.hpp"
#include "ibrkit/errors.hpp"
#include "ibrkit/ingest.hpp"

namespace ibrkit {

namespace {

// per-worker aggregation state; everything here merges exactly (integers and
// ordered keys), so shard count never shows in the results
struct Shard {
    SummaryAccumulator summary;
    ProfileMap profiles;
    HourlyAccumulator hours;
    std::map<uint16_t, PortTraffic> by_port;
    std::map<std::string, uint64_t> by_country;
    std::map<uint32_t, uint64_t> by_asn;
    std::map<Ipv4, uint64_t> by_source;
    FingerprintTally fingerprints;
    std::vector<uint64_t> backscatter_ids;
    uint64_t backscatter_packets = 0;
    uint64_t unclassified_records = 0;
    uint64_t candidate_records = 0;
    EnrichmentTally enrichment;

    void consume(ConnectionRecord& record, uint64_t index,
                 const AnalyzeOptions& options) {
        if (options.snapshot) {
            enrich_record(record, *options.snapshot, options.enrich_policy,
                          enrichment);
        }
        summary.add(record);
        add_to_profiles(profiles, record);
        hours.add(record);
        auto& traffic = by_port[record.port];
        traffic.packets += record.packets;
        traffic.records += 1;
        by_country[record.country] += record.packets;
        by_asn[record.asn] += record.packets;
        by_source[record.source_ip] += record.packets;
        fingerprints.add(record);
        switch (classify_backscatter(record)) {
            case BackscatterClass::backscatter:
                ++candidate_records;
                backscatter_ids.push_back(index);
                backscatter_packets += record.packets;
                break;
            case BackscatterClass::not_backscatter:
                if (record.tcp) ++candidate_records;
                break;
            case BackscatterClass::unclassified:
                ++unclassified_records;
                break;
        }
    }

    void merge(Shard&& other) {
        summary.merge(other.summary);
        merge_profiles(profiles, other.profiles);
        hours.merge(other.hours);
        for (const auto& [port, t] : other.by_port) {
            by_port[port].packets += t.packets;
            by_port[port].records += t.records;
        }
        for (const auto& [key, v] : other.by_country) by_country[key] += v;
        for (const auto& [key, v] : other.by_asn) by_asn[key] += v;
        for (const auto& [key, v] : other.by_source) by_source[key] += v;
        fingerprints.merge(other.fingerprints);
        backscatter_ids.insert(backscatter_ids.end(), other.backscatter_ids.begin(),
                               other.backscatter_ids.end());
        backscatter_packets += other.backscatter_packets;
        unclassified_records += other.unclassified_records;
        candidate_records += other.candidate_records;
        enrichment.merge(other.enrichment);
    }
};

using Batch = std::vector<std::pair<ConnectionRecord, uint64_t>>;
constexpr size_t kBatchRecords = 1024;

// single-producer bounded queue; keeps in-flight memory at a few batches per
// worker regardless of input size
class BatchQueue {
public:
    void push(Batch&& batch) {
        std::unique_lock lock(mutex_);
        cv_space_.wait(lock, [&] { return items_.size() < kDepth; });
        items_.push_back(std::move(batch));
        cv_items_.notify_one();
    }

    bool pop(Batch& out) {
        std::unique_lock lock(mutex_);
        cv_items_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return false;
        out = std::move(items_.front());
        items_.pop_front();
        cv_space_.notify_one();
        return true;
    }

    void close() {
        std::lock_guard lock(mutex_);
        closed_ = true;
        cv_items_.notify_all();
    }

private:
    static constexpr size_t kDepth = 4;
    std::mutex mutex_;
    std::condition_variable cv_items_;
    std::condition_variable cv_space_;
    std::deque<Batch> items_;
    bool closed_ = false;
};

AnalysisReport finalize_report(Shard&& shard, const CleaningReport& cleaning,
                               const std::string& digest,
                               const AnalyzeOptions& options) {
    std::sort(shard.backscatter_ids.begin(), shard.backscatter_ids.end());

    AnalysisReport report;
    report.summary = shard.summary.finalize();
    report.cleaning = cleaning;

    DetectionLabels labels;
    labels.scan_threshold_used = options.scan_threshold;
    labels.scanners = detect_scanners(shard.profiles, options.scan_threshold);
    labels.backscatter.record_indices = shard.backscatter_ids;
    labels.backscatter.backscatter_packets = shard.backscatter_packets;
    labels.backscatter.unclassified_records = shard.unclassified_records;
    labels.backscatter.candidate_records = shard.candidate_records;
    labels.fingerprint_counts = shard.fingerprints;
    report.detection = summarize_detection(labels);

    std::vector<double> volumes;
    volumes.reserve(shard.by_source.size());
    for (const auto& [ip, packets] : shard.by_source) {
        (void)ip;
        volumes.push_back(static_cast<double>(packets));
    }
    report.lorenz =
        downsample_lorenz(lorenz_gini(volumes), options.lorenz_max_points);
    report.percentiles = percentile_table(shard.by_source, options.percentiles);

    HourWindow window = shard.hours.window();
    report.entropy = shard.hours.finalize(window, options.entropy_weight);
    report.burstiness = classify_burstiness(shard.hours, window, options.burst);
    report.hourly_volume =
        hourly_volume_by_asn(shard.hours, window, options.hourly_asn_series);

    report.top_countries = make_top_table(shard.by_country, options.top_table_size,
                                          [](const std::string& c) { return c; });
    report.top_asns = make_top_table(shard.by_asn, options.top_table_size,
                                     [](uint32_t asn) { return std::to_string(asn); });
    std::map<uint16_t, uint64_t> port_packets;
    for (const auto& [port, t] : shard.by_port) port_packets[port] = t.packets;
    report.top_ports = make_top_table(port_packets, options.top_table_size,
                                      [](uint16_t port) { return std::to_string(port); });
    report.port_risk = compare_port_risk(shard.by_port, options.registry);

    if (options.ground_truth) {
        report.ground_truth =
            evaluate_ground_truth(*options.ground_truth, labels.scanners,
                                  shard.backscatter_ids, report.burstiness);
    }

    report.run.tool_version = kToolVersion;
    report.run.input_path = options.input_label;
    report.run.input_digest = digest;
    report.run.config = options.config_echo;

    options.enrichment = shard.enrichment;
    return report;
}

}  // namespace

AnalysisReport analyze_stream(std::istream& in, const AnalyzeOptions& options) {
    IngestOptions ingest;
    ingest.chunk_size = options.chunk_size;
    ingest.rejects_path = options.rejects_path;
    RecordReader reader(in, ingest);

    size_t workers = std::clamp<size_t>(options.workers, 1, 64);
    Shard merged;

    if (workers == 1) {
        while (auto next = reader.next_indexed()) {
            merged.consume(next->first, next->second, options);
        }
    } else {
        std::vector<BatchQueue> queues(workers);
        std::vector<Shard> shards(workers);
        std::vector<std::exception_ptr> failures(workers);
        std::vector<std::thread> threads;
        threads.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    Batch batch;
                    while (queues[w].pop(batch)) {
                        for (auto& [record, index] : batch) {
                            shards[w].consume(record, index, options);
                        }
                    }
                } catch (...) {
                    failures[w] = std::current_exception();
                    // keep draining so the producer never blocks on a full
                    // queue
                    Batch drain;
                    while (queues[w].pop(drain)) {
                    }
                }
            });
        }

        Batch batch;
        batch.reserve(kBatchRecords);
        size_t next_worker = 0;
        while (auto next = reader.next_indexed()) {
            batch.emplace_back(std::move(next->first), next->second);
            if (batch.size() == kBatchRecords) {
                queues[next_worker].push(std::move(batch));
                batch = Batch();
                batch.reserve(kBatchRecords);
                next_worker = (next_worker + 1) % workers;
            }
        }
        if (!batch.empty()) queues[next_worker].push(std::move(batch));
        for (auto& queue : queues) queue.close();
        for (auto& thread : threads) thread.join();
        for (auto& failure : failures) {
            if (failure) std::rethrow_exception(failure);
        }
        // merge in worker order: deterministic, and all state merges exactly
        for (auto& shard : shards) merged.merge(std::move(shard));
    }

    const auto& cleaning = reader.report();
    if (cleaning.rows_retained == 0) {
        throw input_error("no records retained from " +
                          (options.input_label.empty() ? std::string("input")
                                                       : options.input_label));
    }
    return finalize_report(std::move(merged), cleaning, reader.digest_hex(), options);
}

AnalysisReport analyze_file(const std::string& path, const AnalyzeOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open input file: " + path);
    if (options.input_label.empty()) {
        AnalyzeOptions labeled = options;
        labeled.input_label = path;
        auto report = analyze_stream(in, labeled);
        options.enrichment = labeled.enrichment;
        return report;
    }
    return analyze_stream(in, options);
}

namespace {

template <typename T>
std::pair<double, double> precision_recall(const std::vector<T>& detected,
                                           const std::vector<T>& truth) {
    std::vector<T> hits;
    std::set_intersection(detected.begin(), detected.end(), truth.begin(),
                          truth.end(), std::back_inserter(hits));
    double precision = detected.empty()
                           ? 1.0
                           : static_cast<double>(hits.size()) / detected.size();
    double recall =
        truth.empty() ? 1.0 : static_cast<double>(hits.size()) / truth.size();
    return {precision, recall};
}

}  // namespace

GroundTruthEval evaluate_ground_truth(const GroundTruth& truth,
                                      const std::vector<Ipv4>& scanners,
                                      const std::vector<uint64_t>& backscatter_ids,
                                      const std::vector<AsnActivity>& burstiness) {
    GroundTruthEval eval;
    auto [sp, sr] = precision_recall(scanners, truth.scanner_sources);
    eval.scanner_precision = sp;
    eval.scanner_recall = sr;
    auto [bp, br] = precision_recall(backscatter_ids, truth.backscatter_record_ids);
    eval.backscatter_precision = bp;
    eval.backscatter_recall = br;
    eval.asn_class_expected = truth.asn_class.size();
    for (const auto& [asn, label] : truth.asn_class) {
        for (const auto& row : burstiness) {
            if (row.asn == asn && row.label == label) {
                ++eval.asn_class_matched;
                break;
            }
        }
    }
    return eval;
}

}  // namespace ibrkit
