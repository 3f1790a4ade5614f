// Go/no-go gate for the whole pipeline: eight checks, one line each, exit 0
// only if every one passes. Tolerances and budgets are pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "ibrkit/analyze.hpp"
#include "ibrkit/detect.hpp"
#include "ibrkit/errors.hpp"
#include "ibrkit/ingest.hpp"
#include "ibrkit/metrics.hpp"
#include "ibrkit/prng.hpp"
#include "ibrkit/synth.hpp"

using namespace ibrkit;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kGiniOracleTol = 1e-9;
constexpr double kGiniExactTol = 1e-12;
constexpr double kEntropyTol = 1e-12;
constexpr double kShareLow = 0.79;
constexpr double kShareHigh = 0.83;
constexpr double kGiniFloor = 0.95;
constexpr double kGiniOracleBudgetSec = 10.0;
constexpr double kRegimeBudgetSec = 60.0;
constexpr double kThroughputBudgetSec = 120.0;
constexpr uint64_t kMemoryCapMiB = 256;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }
Outcome pass(std::string detail) { return {true, std::move(detail)}; }

std::string fmt(double v, int digits = 4) {
    std::ostringstream out;
    out.precision(digits);
    out << v;
    return out.str();
}

// ---- fixtures ------------------------------------------------------------

SynthConfig small_config() {
    SynthConfig config;
    config.seed = 20260818;
    config.window_hours = 48;
    config.target_top1pct_share = 0.6;
    config.pareto_min = 8;
    config.pareto_cap = 50000;

    CampaignSpec scanners;
    scanners.kind = CampaignKind::persistent_scanner;
    scanners.sources = 10;
    scanners.ports = {23, 2323, 80, 8080, 5555};
    scanners.packets_per_hour = 25000;
    config.campaigns.push_back(scanners);

    CampaignSpec spike;
    spike.kind = CampaignKind::bursty_spike;
    spike.sources = 1;
    spike.spike_hour = 30;
    spike.spike_packets = 1100000;
    config.campaigns.push_back(spike);

    CampaignSpec surge;
    surge.kind = CampaignKind::coordinated_surge;
    surge.sources = 60;
    surge.spike_hour = 41;
    surge.packets_per_record = 900;
    surge.port_pool = 2048;
    surge.ports_per_source = 3;
    config.campaigns.push_back(surge);

    CampaignSpec victims;
    victims.kind = CampaignKind::backscatter_victim;
    victims.sources = 20;
    victims.records_per_source = 50;
    config.campaigns.push_back(victims);

    CampaignSpec noise;
    noise.kind = CampaignKind::background_noise;
    noise.sources = 2000;
    config.campaigns.push_back(noise);
    return config;
}

// million-record regime: top 1% of sources carrying ~81% of packets over a
// 240h window, with one persistent and one single-spike heavy ASN planted
SynthConfig million_config() {
    SynthConfig config;
    config.seed = 424242;
    config.window_hours = 240;
    config.target_top1pct_share = 0.81;
    config.target_records = 1000000;
    config.pareto_alpha = 0.5;
    config.pareto_min = 1;
    config.pareto_cap = 2000000;
    config.background_asn_pool = 400;

    CampaignSpec scanners;
    scanners.kind = CampaignKind::persistent_scanner;
    scanners.sources = 10;
    scanners.ports = {23, 2323, 80, 8080, 5555};
    scanners.packets_per_hour = 500;  // 10 * 500 * 240h = 1.2M packets, all hours
    config.campaigns.push_back(scanners);

    CampaignSpec spike;
    spike.kind = CampaignKind::bursty_spike;
    spike.sources = 1;
    spike.spike_hour = 120;
    spike.spike_packets = 6000000;
    config.campaigns.push_back(spike);

    CampaignSpec victims;
    victims.kind = CampaignKind::backscatter_victim;
    victims.sources = 40;
    victims.records_per_source = 100;
    config.campaigns.push_back(victims);

    CampaignSpec noise;
    noise.kind = CampaignKind::background_noise;
    noise.sources = 65000;
    config.campaigns.push_back(noise);
    return config;
}

SynthConfig surge_config() {
    SynthConfig config;
    config.seed = 9091;
    config.window_hours = 48;
    // the surge mass is fixed, so only a share target near the natural
    // campaign ratio is reachable
    config.target_top1pct_share = 0.05;

    CampaignSpec surge;
    surge.kind = CampaignKind::coordinated_surge;
    surge.sources = 400;
    surge.spike_hour = 47;
    surge.packets_per_record = 3000;
    surge.port_pool = 64000;
    surge.ports_per_source = 3;
    config.campaigns.push_back(surge);

    CampaignSpec noise;
    noise.kind = CampaignKind::background_noise;
    noise.sources = 2000;
    config.campaigns.push_back(noise);
    return config;
}

struct Fixtures {
    fs::path dir;
    fs::path million_csv;
    GroundTruth million_truth;
    double million_gen_seconds = 0.0;
    std::optional<AnalysisReport> million_report;
    double million_analyze_seconds = 0.0;

    std::vector<ConnectionRecord> small_records;
    GroundTruth small_truth;
    std::optional<AnalysisReport> small_report;

    const AnalysisReport& million() {
        if (!million_report) {
            AnalyzeOptions options;
            options.ground_truth = &million_truth;
            auto start = Clock::now();
            million_report = analyze_file(million_csv.string(), options);
            million_analyze_seconds = seconds_since(start);
        }
        return *million_report;
    }

    const AnalysisReport& small() {
        if (!small_report) {
            std::ostringstream csv;
            write_corpus_header(csv);
            for (const auto& r : small_records) write_corpus_record(csv, r);
            std::istringstream in(csv.str());
            AnalyzeOptions options;
            options.ground_truth = &small_truth;
            options.input_label = "small-corpus";
            small_report = analyze_stream(in, options);
        }
        return *small_report;
    }
};

// ---- criterion 1: gini vs pairwise oracle --------------------------------

double pairwise_gini(const std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    if (total == 0.0) return 0.0;
    double diff_sum = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        for (size_t j = 0; j < v.size(); ++j) {
            diff_sum += std::fabs(v[i] - v[j]);
        }
    }
    auto n = static_cast<double>(v.size());
    return diff_sum / (2.0 * n * total);
}

Outcome criterion1() {
    auto start = Clock::now();

    double zero_case = lorenz_gini({1, 1, 1, 1}).gini;
    if (std::fabs(zero_case) > kGiniExactTol) {
        return fail("[1,1,1,1] gave " + fmt(zero_case, 17) + ", want 0");
    }
    double point75 = lorenz_gini({0, 0, 0, 100}).gini;
    if (std::fabs(point75 - 0.75) > kGiniExactTol) {
        return fail("[0,0,0,100] gave " + fmt(point75, 17) + ", want 0.75");
    }

    SplitMix64 rng(20250801);
    double max_diff = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.below(999);
        std::vector<double> v(n);
        bool any = false;
        for (auto& x : v) {
            if (rng.below(10) < 3) {
                x = 0.0;  // mixed zero mass
            } else {
                // heavy tail via inverse power draw
                double u = rng.unit_positive();
                x = std::floor(std::pow(u, -1.25));
                any = true;
            }
        }
        if (!any) v[rng.below(n)] = 1.0;
        double fast = lorenz_gini(v).gini;
        double oracle = pairwise_gini(v);
        max_diff = std::max(max_diff, std::fabs(fast - oracle));
    }
    double elapsed = seconds_since(start);
    if (max_diff > kGiniOracleTol) {
        return fail("max |sorted-rank - pairwise| = " + fmt(max_diff, 3) +
                    " exceeds 1e-9");
    }
    if (elapsed > kGiniOracleBudgetSec) {
        return fail("took " + fmt(elapsed, 3) + "s, budget 10s");
    }
    return pass("200 vectors, max |diff| " + fmt(max_diff, 3) + ", exact cases on, " +
                fmt(elapsed, 3) + "s");
}

// ---- criterion 2: entropy closed forms ------------------------------------

Outcome criterion2() {
    if (std::fabs(shannon_entropy({42})) > kEntropyTol) {
        return fail("single category not 0 bits");
    }
    for (uint64_t k : {2, 4, 8, 1024}) {
        std::vector<uint64_t> counts(k, 7);
        double h = shannon_entropy(counts);
        double want = std::log2(static_cast<double>(k));
        if (std::fabs(h - want) > kEntropyTol) {
            return fail("uniform-" + std::to_string(k) + " gave " + fmt(h, 17) +
                        ", want log2(k)");
        }
    }
    double skew = shannon_entropy({2, 1, 1});
    if (std::fabs(skew - 1.5) > kEntropyTol) {
        return fail("{2,1,1} gave " + fmt(skew, 17) + ", want 1.5");
    }

    SplitMix64 rng(20250802);
    for (int trial = 0; trial < 1000; ++trial) {
        size_t k = 1 + rng.below(256);
        std::vector<uint64_t> counts(k);
        for (auto& c : counts) c = 1 + rng.below(10000);
        double h = shannon_entropy(counts);
        double bound = std::log2(static_cast<double>(k));
        if (h < -kEntropyTol || h > bound + kEntropyTol) {
            return fail("entropy " + fmt(h, 17) + " outside [0, log2(" +
                        std::to_string(k) + ")]");
        }
    }
    return pass("closed forms within 1e-12, bound held on 1000 random distributions");
}

// ---- criterion 3: scanner heuristic vs brute force -------------------------

Outcome criterion3(Fixtures& fx) {
    const auto& records = fx.small_records;
    if (records.size() > 100000) {
        return fail("fixture has " + std::to_string(records.size()) +
                    " records, oracle bound is 1e5");
    }

    std::unordered_map<uint32_t, std::set<uint16_t>> ports_by_source;
    for (const auto& r : records) ports_by_source[r.source_ip.value].insert(r.port);

    ProfileMap profiles;
    for (const auto& r : records) add_to_profiles(profiles, r);

    for (uint64_t t = 1; t <= 10; ++t) {
        std::vector<Ipv4> brute;
        for (const auto& [ip, ports] : ports_by_source) {
            if (ports.size() >= t) brute.push_back(Ipv4{ip});
        }
        std::sort(brute.begin(), brute.end());
        auto fast = detect_scanners(profiles, t);
        if (fast != brute) {
            return fail("threshold " + std::to_string(t) + ": detector and "
                        "brute force disagree");
        }
    }

    auto at5 = detect_scanners(profiles, 5);
    if (at5 != fx.small_truth.scanner_sources) {
        return fail("threshold 5 detections differ from planted ground truth");
    }

    // monotonicity: raising the threshold only ever shrinks the flagged set
    auto prev = detect_scanners(profiles, 1);
    for (uint64_t t = 2; t <= 10; ++t) {
        auto cur = detect_scanners(profiles, t);
        if (!std::includes(prev.begin(), prev.end(), cur.begin(), cur.end())) {
            return fail("flagged set grew from threshold " + std::to_string(t - 1) +
                        " to " + std::to_string(t));
        }
        prev = std::move(cur);
    }
    return pass("brute-force equality for t in 1..10 on " +
                std::to_string(records.size()) +
                " records, precision = recall = 1.0, monotone");
}

// ---- criterion 4: concentration regime -------------------------------------

Outcome criterion4(Fixtures& fx) {
    const auto& report = fx.million();
    double total = fx.million_gen_seconds + fx.million_analyze_seconds;

    if (report.summary.record_count != 1000000) {
        return fail("corpus has " + std::to_string(report.summary.record_count) +
                    " records, want exactly 1000000");
    }
    const PercentileRow* row = nullptr;
    for (const auto& r : report.percentiles.rows) {
        if (std::fabs(r.percentile - 0.01) < 1e-12) row = &r;
    }
    if (!row) return fail("no 1% row in the percentile table");
    if (row->cumulative_share < kShareLow || row->cumulative_share > kShareHigh) {
        return fail("top-1% share " + fmt(row->cumulative_share) +
                    " outside [0.79, 0.83]");
    }
    if (report.lorenz.gini < kGiniFloor) {
        return fail("gini " + fmt(report.lorenz.gini) + " below 0.95");
    }
    if (total > kRegimeBudgetSec) {
        return fail("generate+analyze took " + fmt(total, 3) + "s, budget 60s");
    }
    return pass("top-1% share " + fmt(row->cumulative_share) + " (" +
                std::to_string(row->ip_count) + " sources), gini " +
                fmt(report.lorenz.gini) + ", " + fmt(total, 3) + "s");
}

// ---- criterion 5: burstiness closed loop ------------------------------------

Outcome criterion5(Fixtures& fx) {
    const auto& report = fx.million();

    const AsnActivity* persistent = nullptr;
    const AsnActivity* bursty = nullptr;
    for (const auto& row : report.burstiness) {
        if (row.asn == 64512) persistent = &row;
        if (row.asn == 64513) bursty = &row;
    }
    if (!persistent || !bursty) return fail("planted ASNs missing from the table");
    if (persistent->label != BurstinessLabel::persistent_high) {
        return fail("ASN 64512 labeled " +
                    std::string(to_string(persistent->label)) +
                    ", want persistent_high");
    }
    if (bursty->label != BurstinessLabel::bursty_high) {
        return fail("ASN 64513 labeled " + std::string(to_string(bursty->label)) +
                    ", want bursty_high");
    }
    if (!report.ground_truth || report.ground_truth->asn_class_matched != 2 ||
        report.ground_truth->asn_class_expected != 2) {
        return fail("ground-truth ASN class evaluation is not 2/2");
    }
    return pass("64512 -> persistent_high (" +
                std::to_string(persistent->total_packets) + " packets, " +
                fmt(persistent->activity_ratio, 3) + " active), 64513 -> bursty_high (" +
                std::to_string(bursty->total_packets) + " packets, 1 hour), 2/2");
}

// ---- criterion 6: entropy and volume peak together ---------------------------

Outcome criterion6() {
    std::ostringstream csv;
    auto truth = generate_csv(surge_config(), csv);
    (void)truth;
    std::istringstream in(csv.str());
    AnalyzeOptions options;
    options.input_label = "surge-corpus";
    auto report = analyze_stream(in, options);

    const EntropyRow* peak_volume = nullptr;
    const EntropyRow* peak_port = nullptr;
    const EntropyRow* peak_asn = nullptr;
    for (const auto& row : report.entropy.rows) {
        if (!peak_volume || row.total_packets > peak_volume->total_packets) {
            peak_volume = &row;
        }
        if (!peak_port || row.norm_port_entropy > peak_port->norm_port_entropy) {
            peak_port = &row;
        }
        if (!peak_asn || row.norm_asn_entropy > peak_asn->norm_asn_entropy) {
            peak_asn = &row;
        }
    }
    if (!peak_volume) return fail("no entropy rows");
    if (peak_port->hour != peak_volume->hour) {
        return fail("max normalized port entropy at hour " +
                    std::to_string(peak_port->hour - report.entropy.window.first_hour) +
                    ", peak volume at " +
                    std::to_string(peak_volume->hour - report.entropy.window.first_hour));
    }
    if (peak_asn->hour != peak_volume->hour) {
        return fail("max normalized ASN entropy not in the peak-volume hour");
    }
    return pass("surge hour " +
                std::to_string(peak_volume->hour - report.entropy.window.first_hour) +
                " holds peak volume (" + std::to_string(peak_volume->total_packets) +
                " packets), max port entropy " + fmt(peak_port->norm_port_entropy, 3) +
                ", max ASN entropy " + fmt(peak_asn->norm_asn_entropy, 3));
}

// ---- criterion 7: conservation and determinism --------------------------------

bool tables_reconcile(const AnalysisReport& report, std::string& why) {
    auto check = [&](const TopTable& table, const char* name) {
        uint64_t listed = 0;
        for (const auto& [key, packets] : table.rows) listed += packets;
        if (listed + table.other_packets != report.summary.total_packets) {
            why = std::string(name) + " rows + other != total_packets";
            return false;
        }
        return true;
    };
    if (!check(report.top_ports, "top_ports")) return false;
    if (!check(report.top_countries, "top_countries")) return false;
    if (!check(report.top_asns, "top_asns")) return false;

    uint64_t hourly = 0;
    for (const auto& row : report.hourly_volume.rows) hourly += row.total;
    if (hourly != report.summary.total_packets) {
        why = "hourly volume rows do not sum to total_packets";
        return false;
    }
    uint64_t entropy_total = 0;
    for (const auto& row : report.entropy.rows) entropy_total += row.total_packets;
    if (entropy_total != report.summary.total_packets) {
        why = "entropy rows do not sum to total_packets";
        return false;
    }
    return true;
}

Outcome criterion7(Fixtures& fx) {
    // conservation on the clean fixtures
    for (const auto* report : {&fx.small(), &fx.million()}) {
        if (!report->cleaning.conserves() || report->cleaning.rejected_total() != 0) {
            return fail("clean fixture lost rows in ingest");
        }
    }
    // conservation with injected breakage
    auto tampered_path = fx.dir / "tampered.csv";
    {
        std::ostringstream csv;
        write_corpus_header(csv);
        for (size_t i = 0; i < 100; ++i) write_corpus_record(csv, fx.small_records[i]);
        std::ofstream out(tampered_path, std::ios::binary);
        out << csv.str() << "not,a,real,row\n" << "\"unterminated\n";
    }
    {
        std::ifstream in(tampered_path, std::ios::binary);
        RecordReader reader(in);
        while (reader.next()) {
        }
        const auto& cleaning = reader.report();
        if (!cleaning.conserves() || cleaning.rejected_total() != 2 ||
            cleaning.rows_retained != 100) {
            return fail("tampered fixture: expected 100 retained + 2 rejected, got " +
                        std::to_string(cleaning.rows_retained) + " + " +
                        std::to_string(cleaning.rejected_total()));
        }
    }

    std::string why;
    if (!tables_reconcile(fx.small(), why)) return fail("small corpus: " + why);
    if (!tables_reconcile(fx.million(), why)) return fail("million corpus: " + why);

    // byte determinism: rerun, then vary workers and chunk size
    AnalyzeOptions base;
    base.ground_truth = &fx.million_truth;
    auto baseline = report_to_json(fx.million());
    auto rerun = report_to_json(analyze_file(fx.million_csv.string(), base));
    if (rerun != baseline) return fail("identical rerun changed report bytes");

    AnalyzeOptions varied;
    varied.ground_truth = &fx.million_truth;
    varied.workers = 4;
    varied.chunk_size = 1009;
    auto varied_json = report_to_json(analyze_file(fx.million_csv.string(), varied));
    if (varied_json != baseline) {
        return fail("workers=4/chunk=1009 changed report bytes");
    }
    return pass("conservation on 3 fixtures, totals reconcile, reports "
                "byte-identical across reruns, workers, and chunk sizes");
}

// ---- criterion 8: throughput and bounded memory --------------------------------

uint64_t peak_rss_mib() {
    std::ifstream status("/proc/self/status");
    std::string line;
    while (std::getline(status, line)) {
        if (line.rfind("VmHWM:", 0) == 0) {
            std::istringstream fields(line.substr(6));
            uint64_t kib = 0;
            fields >> kib;
            return kib / 1024;
        }
    }
    return 0;
}

void reset_peak_rss() {
    // "5" resets the peak-RSS watermark so VmHWM reflects only what follows
    std::ofstream refs("/proc/self/clear_refs");
    refs << 5;
}

Outcome criterion8(Fixtures& fx) {
    reset_peak_rss();
    auto start = Clock::now();
    AnalyzeOptions options;
    auto report = analyze_file(fx.million_csv.string(), options);
    double elapsed = seconds_since(start);
    uint64_t peak = peak_rss_mib();

    if (report.summary.record_count != 1000000) {
        return fail("analysis saw " + std::to_string(report.summary.record_count) +
                    " records");
    }
    if (elapsed > kThroughputBudgetSec) {
        return fail("ingest+analysis took " + fmt(elapsed, 3) + "s, budget 120s");
    }
    if (peak == 0) return fail("could not read VmHWM");
    if (peak > kMemoryCapMiB) {
        return fail("peak RSS " + std::to_string(peak) + " MiB exceeds " +
                    std::to_string(kMemoryCapMiB) + " MiB cap");
    }
    auto file_mib = fs::file_size(fx.million_csv) / (1024 * 1024);
    return pass("1M records in " + fmt(elapsed, 3) + "s, peak RSS " +
                std::to_string(peak) + " MiB for a " + std::to_string(file_mib) +
                " MiB corpus");
}

}  // namespace

int main() {
    Fixtures fx;
    std::error_code ec;
    fx.dir = fs::temp_directory_path() / "ibrkit-acceptance";
    fs::remove_all(fx.dir, ec);
    fs::create_directories(fx.dir);

    // small corpus up front; the million-record one is timed for criterion 4
    std::tie(fx.small_records, fx.small_truth) = generate_records(small_config());
    {
        fx.million_csv = fx.dir / "million.csv";
        std::ofstream out(fx.million_csv, std::ios::binary);
        auto start = Clock::now();
        fx.million_truth = generate_csv(million_config(), out);
        out.flush();
        fx.million_gen_seconds = seconds_since(start);
    }

    struct Criterion {
        const char* name;
        Outcome outcome;
    };
    std::vector<Criterion> results;
    results.push_back({"gini oracle equivalence", criterion1()});
    results.push_back({"entropy closed forms", criterion2()});
    results.push_back({"scanner heuristic oracle", criterion3(fx)});
    results.push_back({"concentration regime reproduction", criterion4(fx)});
    results.push_back({"burstiness closed loop", criterion5(fx)});
    results.push_back({"entropy-volume synchronization", criterion6()});
    results.push_back({"pipeline conservation and determinism", criterion7(fx)});
    results.push_back({"throughput and bounded memory", criterion8(fx)});

    int failures = 0;
    for (size_t i = 0; i < results.size(); ++i) {
        const auto& [name, outcome] = results[i];
        if (!outcome.pass) ++failures;
        std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << i + 1
                  << ": " << name << " (" << outcome.detail << ")\n";
    }
    fs::remove_all(fx.dir, ec);
    if (failures) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all 8 criteria passed\n";
    return 0;
}
