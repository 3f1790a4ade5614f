#include "ibrkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "ibrkit/csv.hpp"
#include "ibrkit/detect.hpp"
#include "ibrkit/errors.hpp"
#include "ibrkit/ingest.hpp"
#include "ibrkit/prng.hpp"

namespace ibrkit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr const char* kCountryPool[] = {
    "US", "CN", "NL", "BR", "RU", "DE", "IN", "GB", "FR", "KR", "JP", "VN",
    "TW", "IR", "UA", "PL", "IT", "ES", "CA", "AU", "SG", "HK", "TR", "MX"};
constexpr size_t kCountryPoolSize = std::size(kCountryPool);

// Ambient scanning concentrates on a few notorious services; the rest of the
// weight is spread thin so quiet hours keep visibly skewed port histograms.
uint16_t draw_background_port(SplitMix64& rng) {
    uint64_t r = rng.below(100);
    if (r < 50) return 23;
    if (r < 60) return 2323;
    if (r < 70) return 445;
    if (r < 80) return 80;
    return static_cast<uint16_t>(1 + rng.below(65535));
}

// Background ASN pool with a cubic skew: a handful of networks dominate, the
// tail barely shows up. Keeps quiet-hour ASN entropy well under the uniform
// ceiling.
uint32_t draw_background_asn(SplitMix64& rng, uint32_t pool) {
    double u = rng.unit();
    auto idx = static_cast<uint32_t>(u * u * u * pool);
    if (idx >= pool) idx = pool - 1;
    return 1000 + idx;
}

// Inverse-CDF draw from a Pareto truncated to [min, cap].
uint64_t draw_truncated_pareto(SplitMix64& rng, double alpha, uint64_t min_v,
                               uint64_t cap) {
    double xm = static_cast<double>(min_v);
    double t = 1.0 - std::pow(xm / static_cast<double>(cap), alpha);
    double u = rng.unit_positive();
    double v = xm / std::pow(1.0 - u * t, 1.0 / alpha);
    auto out = static_cast<uint64_t>(std::llround(v));
    return std::clamp(out, min_v, cap);
}

// Surge port pool: spread over the high range by a stride coprime with the
// range so pool indices map to distinct ports.
uint16_t surge_pool_port(uint32_t pool_index) {
    return static_cast<uint16_t>(1024 + (static_cast<uint64_t>(pool_index) * 9973) % 64000);
}

struct SourcePlan {
    Ipv4 ip;
    uint32_t asn = 0;
    std::string country;
    CampaignKind kind = CampaignKind::background_noise;
    const CampaignSpec* spec = nullptr;
    std::vector<uint16_t> ports;  // emission round-robins over these
    uint64_t volume = 0;          // total packets, exact
    uint64_t records = 0;
    int64_t spike_hour = -1;
};

uint64_t distinct_count(const std::vector<uint16_t>& ports) {
    std::set<uint16_t> s(ports.begin(), ports.end());
    return s.size();
}

// Splits packets-per-hour over the scanner's port list with halving weights
// (heaviest first), remainder to the last port. Every port gets >= 1 packet.
std::vector<uint64_t> scanner_port_packets(uint64_t per_hour, size_t nports) {
    std::vector<uint64_t> out(nports);
    uint64_t used = 0;
    for (size_t j = 0; j + 1 < nports; ++j) {
        out[j] = per_hour >> (j + 1);
        used += out[j];
    }
    out[nports - 1] = per_hour - used;
    return out;
}

const char* intended_class_name(BurstinessLabel label) {
    return label == BurstinessLabel::persistent_high ? "persistent_high" : "bursty_high";
}

}  // namespace

std::optional<CampaignKind> parse_campaign_kind(std::string_view text) {
    if (text == "persistent_scanner") return CampaignKind::persistent_scanner;
    if (text == "bursty_spike") return CampaignKind::bursty_spike;
    if (text == "coordinated_surge") return CampaignKind::coordinated_surge;
    if (text == "backscatter_victim") return CampaignKind::backscatter_victim;
    if (text == "background_noise") return CampaignKind::background_noise;
    return std::nullopt;
}

std::string_view to_string(CampaignKind kind) {
    switch (kind) {
        case CampaignKind::persistent_scanner: return "persistent_scanner";
        case CampaignKind::bursty_spike: return "bursty_spike";
        case CampaignKind::coordinated_surge: return "coordinated_surge";
        case CampaignKind::backscatter_victim: return "backscatter_victim";
        case CampaignKind::background_noise: return "background_noise";
    }
    return "background_noise";
}

void validate_config(const SynthConfig& config) {
    auto fail = [](const std::string& why) { throw usage_error("invalid_config: " + why); };
    if (config.window_hours < 1) fail("window_hours must be >= 1");
    if (config.window_start_epoch % kSecondsPerHour != 0) {
        fail("window_start_epoch must be hour-aligned");
    }
    if (!(config.target_top1pct_share > 0.0) || !(config.target_top1pct_share < 1.0)) {
        fail("target_top1pct_share must be in (0,1)");
    }
    if (config.campaigns.empty()) fail("at least one campaign required");
    if (config.pareto_alpha <= 0.0) fail("pareto_alpha must be positive");
    if (config.pareto_min < 1 || config.pareto_cap <= config.pareto_min) {
        fail("pareto volume bounds must satisfy 1 <= min < cap");
    }
    if (config.background_asn_pool < 1) fail("background_asn_pool must be >= 1");

    std::map<uint32_t, BurstinessLabel> planted;
    auto horizon = static_cast<int64_t>(config.window_hours);
    for (const auto& c : config.campaigns) {
        if (c.sources < 1) fail("campaign sources must be >= 1");
        switch (c.kind) {
            case CampaignKind::persistent_scanner: {
                if (c.ports.size() < 5 || c.ports.size() > 16) {
                    fail("persistent_scanner needs 5..16 ports");
                }
                if (distinct_count(c.ports) != c.ports.size()) {
                    fail("persistent_scanner ports must be distinct");
                }
                if (c.packets_per_hour < (uint64_t{1} << c.ports.size())) {
                    fail("persistent_scanner packets_per_hour too small for port count");
                }
                uint32_t asn = c.asn ? c.asn : 64512;
                auto [it, fresh] = planted.emplace(asn, BurstinessLabel::persistent_high);
                if (!fresh) fail("planted ASN used by two campaigns");
                break;
            }
            case CampaignKind::bursty_spike: {
                if (c.spike_hour < 0 || c.spike_hour >= horizon) {
                    fail("bursty_spike spike_hour outside window");
                }
                if (c.spike_packets < 1) fail("bursty_spike spike_packets must be >= 1");
                uint32_t asn = c.asn ? c.asn : 64513;
                auto [it, fresh] = planted.emplace(asn, BurstinessLabel::bursty_high);
                if (!fresh) fail("planted ASN used by two campaigns");
                break;
            }
            case CampaignKind::coordinated_surge: {
                if (c.spike_hour < 0 || c.spike_hour >= horizon) {
                    fail("coordinated_surge spike_hour outside window");
                }
                if (c.packets_per_record < 1) {
                    fail("coordinated_surge packets_per_record must be >= 1");
                }
                uint32_t per_source = c.ports_per_source ? c.ports_per_source : 3;
                if (per_source > 4) {
                    fail("coordinated_surge ports_per_source must be <= 4");
                }
                uint32_t pool = c.port_pool ? c.port_pool : 4096;
                if (pool > 64000) fail("coordinated_surge port_pool must be <= 64000");
                break;
            }
            case CampaignKind::backscatter_victim: {
                if (c.records_per_source < 1) {
                    fail("backscatter_victim records_per_source must be >= 1");
                }
                break;
            }
            case CampaignKind::background_noise:
                break;
        }
    }
}

GroundTruth generate(const SynthConfig& config, const RecordSink& sink) {
    validate_config(config);
    SplitMix64 rng(config.seed);
    auto window_hours = static_cast<int64_t>(config.window_hours);

    // phase 1: plan every source (identity, ports, structural volume)
    std::vector<SourcePlan> plans;
    std::unordered_set<uint32_t> used_ips;
    auto fresh_ip = [&] {
        for (;;) {
            // routable-looking unicast space
            auto ip = static_cast<uint32_t>(0x01000000 + rng.below(0xDF000000 - 0x01000000));
            if (used_ips.insert(ip).second) return Ipv4{ip};
        }
    };
    auto pool_country = [&] { return std::string(kCountryPool[rng.below(kCountryPoolSize)]); };

    for (const auto& campaign : config.campaigns) {
        for (uint64_t i = 0; i < campaign.sources; ++i) {
            SourcePlan plan;
            plan.ip = fresh_ip();
            plan.kind = campaign.kind;
            plan.spec = &campaign;
            plan.country = campaign.country.empty() ? pool_country() : campaign.country;
            switch (campaign.kind) {
                case CampaignKind::persistent_scanner:
                    plan.asn = campaign.asn ? campaign.asn : 64512;
                    plan.ports = campaign.ports;
                    plan.volume = campaign.packets_per_hour * config.window_hours;
                    plan.records = config.window_hours * campaign.ports.size();
                    break;
                case CampaignKind::bursty_spike:
                    plan.asn = campaign.asn ? campaign.asn : 64513;
                    plan.ports = campaign.ports.empty() ? std::vector<uint16_t>{5555}
                                                        : campaign.ports;
                    plan.volume = campaign.spike_packets;
                    plan.records = 1;
                    plan.spike_hour = campaign.spike_hour;
                    break;
                case CampaignKind::coordinated_surge: {
                    plan.asn = (campaign.asn_base ? campaign.asn_base : 300000) +
                               static_cast<uint32_t>(i);
                    uint32_t pool = campaign.port_pool ? campaign.port_pool : 4096;
                    uint32_t per_source =
                        campaign.ports_per_source ? campaign.ports_per_source : 3;
                    for (uint32_t p = 0; p < per_source; ++p) {
                        plan.ports.push_back(
                            surge_pool_port(static_cast<uint32_t>(rng.below(pool))));
                    }
                    plan.volume = campaign.packets_per_record * per_source;
                    plan.records = per_source;
                    plan.spike_hour = campaign.spike_hour;
                    break;
                }
                case CampaignKind::backscatter_victim: {
                    plan.asn = draw_background_asn(rng, config.background_asn_pool);
                    uint64_t nports = 1 + rng.below(3);
                    for (uint64_t p = 0; p < nports; ++p) {
                        plan.ports.push_back(static_cast<uint16_t>(1 + rng.below(65535)));
                    }
                    uint64_t per_record =
                        campaign.packets_per_record ? campaign.packets_per_record : 25;
                    plan.records = campaign.records_per_source;
                    plan.volume = plan.records * per_record;
                    break;
                }
                case CampaignKind::background_noise: {
                    plan.asn = draw_background_asn(rng, config.background_asn_pool);
                    uint64_t nports = 1 + rng.below(4);
                    for (uint64_t p = 0; p < nports; ++p) {
                        plan.ports.push_back(draw_background_port(rng));
                    }
                    plan.volume = draw_truncated_pareto(rng, config.pareto_alpha,
                                                        config.pareto_min,
                                                        config.pareto_cap);
                    plan.records = 0;  // decided after calibration
                    break;
                }
            }
            plans.push_back(std::move(plan));
        }
    }

    // phase 2: calibrate background volumes to the target top-1% share.
    // Pure arithmetic; no RNG, so the iteration count cannot perturb later
    // draws.
    size_t n_sources = plans.size();
    auto top_k = static_cast<size_t>(
        std::ceil(0.01 * static_cast<double>(n_sources) - 1e-9));
    top_k = std::clamp<size_t>(top_k, 1, n_sources);
    double achieved_share = 0.0;
    {
        std::vector<size_t> order(n_sources);
        for (size_t i = 0; i < n_sources; ++i) order[i] = i;
        for (int iter = 0; iter < 40; ++iter) {
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                if (plans[a].volume != plans[b].volume) {
                    return plans[a].volume > plans[b].volume;
                }
                return plans[a].ip < plans[b].ip;
            });
            uint64_t top_sum = 0, total = 0;
            for (size_t i = 0; i < n_sources; ++i) {
                total += plans[order[i]].volume;
                if (i < top_k) top_sum += plans[order[i]].volume;
            }
            achieved_share = static_cast<double>(top_sum) / static_cast<double>(total);
            if (std::abs(achieved_share - config.target_top1pct_share) <= 0.002) break;

            uint64_t rest_fixed = 0, rest_background = 0;
            for (size_t i = top_k; i < n_sources; ++i) {
                const auto& p = plans[order[i]];
                if (p.kind == CampaignKind::background_noise) {
                    rest_background += p.volume;
                } else {
                    rest_fixed += p.volume;
                }
            }
            double wanted_rest = static_cast<double>(top_sum) *
                                 (1.0 - config.target_top1pct_share) /
                                 config.target_top1pct_share;
            double wanted_background = wanted_rest - static_cast<double>(rest_fixed);
            if (wanted_background <= 0.0 || rest_background == 0) {
                throw usage_error(
                    "invalid_config: target_top1pct_share unreachable with this "
                    "campaign mix (too little scalable background volume)");
            }
            // damped so a big correction cannot leapfrog the top-k boundary
            // in one step; membership is re-sorted every iteration
            double f = std::clamp(
                wanted_background / static_cast<double>(rest_background), 0.25, 4.0);
            for (size_t i = top_k; i < n_sources; ++i) {
                auto& p = plans[order[i]];
                if (p.kind != CampaignKind::background_noise) continue;
                auto v = static_cast<uint64_t>(
                    std::llround(static_cast<double>(p.volume) * f));
                p.volume = std::max<uint64_t>(v, 1);
            }
        }
        if (std::abs(achieved_share - config.target_top1pct_share) > 0.015) {
            throw usage_error(
                "invalid_config: concentration calibration did not converge");
        }
    }

    // phase 3: background record counts (volume-proportional when a total is
    // requested, volume-scaled otherwise), then exact adjustment
    {
        uint64_t campaign_records = 0, background_volume = 0;
        size_t background_sources = 0;
        for (const auto& p : plans) {
            if (p.kind == CampaignKind::background_noise) {
                background_volume += p.volume;
                ++background_sources;
            } else {
                campaign_records += p.records;
            }
        }
        if (config.target_records == 0) {
            for (auto& p : plans) {
                if (p.kind != CampaignKind::background_noise) continue;
                p.records = std::clamp<uint64_t>(p.volume / 50, 1, 60);
                p.records = std::min(p.records, p.volume);
            }
        } else {
            if (background_sources == 0) {
                throw usage_error(
                    "invalid_config: target_records requires a background campaign");
            }
            uint64_t want = config.target_records;
            if (want < campaign_records + background_sources) {
                throw usage_error("invalid_config: target_records smaller than "
                                  "the structural minimum");
            }
            uint64_t background_target = want - campaign_records;
            if (background_target > background_volume) {
                throw usage_error("invalid_config: target_records exceeds background "
                                  "packet capacity (one packet per record)");
            }
            double ratio = static_cast<double>(background_target) /
                           static_cast<double>(background_volume);
            uint64_t assigned = 0;
            for (auto& p : plans) {
                if (p.kind != CampaignKind::background_noise) continue;
                auto r = static_cast<uint64_t>(
                    std::floor(static_cast<double>(p.volume) * ratio));
                p.records = std::clamp<uint64_t>(r, 1, p.volume);
                assigned += p.records;
            }
            // walk off the rounding remainder one record at a time
            int64_t diff = static_cast<int64_t>(background_target) -
                           static_cast<int64_t>(assigned);
            for (int pass = 0; pass < 100000 && diff != 0; ++pass) {
                bool moved = false;
                for (auto& p : plans) {
                    if (diff == 0) break;
                    if (p.kind != CampaignKind::background_noise) continue;
                    if (diff > 0 && p.records < p.volume) {
                        ++p.records;
                        --diff;
                        moved = true;
                    } else if (diff < 0 && p.records > 1) {
                        --p.records;
                        ++diff;
                        moved = true;
                    }
                }
                if (!moved) {
                    throw usage_error(
                        "invalid_config: cannot meet target_records exactly");
                }
            }
        }
    }

    // phase 4: emit
    GroundTruth truth;
    std::map<uint32_t, std::pair<uint64_t, std::set<int64_t>>> planted_activity;
    std::map<uint32_t, BurstinessLabel> planted_class;
    for (const auto& campaign : config.campaigns) {
        if (campaign.kind == CampaignKind::persistent_scanner) {
            planted_class[campaign.asn ? campaign.asn : 64512] =
                BurstinessLabel::persistent_high;
        } else if (campaign.kind == CampaignKind::bursty_spike) {
            planted_class[campaign.asn ? campaign.asn : 64513] =
                BurstinessLabel::bursty_high;
        }
    }

    uint64_t next_id = 0;
    auto emit = [&](const SourcePlan& plan, uint16_t port, uint64_t packets,
                    int64_t hour, const char* traffic, bool tcp, bool icmp,
                    std::optional<TcpFlags> flags, bool zmap, bool masscan,
                    bool mirai) {
        ConnectionRecord r;
        r.source_ip = plan.ip;
        r.port = port;
        r.traffic = traffic;
        r.first = config.window_start_epoch + hour * kSecondsPerHour +
                  static_cast<int64_t>(rng.below(kSecondsPerHour));
        r.last = r.first + static_cast<int64_t>(rng.below(600));
        r.packets = packets;
        r.bytes = packets * (40 + rng.below(1200));
        r.unique_dests = 1 + rng.below(std::min<uint64_t>(packets, 1000));
        r.unique_dest24s = 1 + rng.below(r.unique_dests);
        r.country = plan.country;
        r.asn = plan.asn;
        r.org = "network-" + std::to_string(plan.asn);
        r.prefix = format_cidr(Cidr{plan.ip.value & prefix_mask(24), 24});
        r.zmap = zmap;
        r.masscan = masscan;
        r.mirai = mirai;
        r.samples = 1 + rng.below(8);
        r.tcp = tcp;
        r.icmp = icmp;
        r.tcp_flags = flags;

        if (r.packets < 1 || r.port < 1 || r.last < r.first ||
            r.unique_dest24s > r.unique_dests || hour < 0 || hour >= window_hours) {
            throw std::logic_error("generator emitted an invalid record");
        }

        if (classify_backscatter(r) == BackscatterClass::backscatter) {
            truth.backscatter_record_ids.push_back(next_id);
        }
        truth.per_source_volume[plan.ip] += r.packets;
        truth.packets_emitted += r.packets;
        if (planted_class.count(r.asn)) {
            auto& slot = planted_activity[r.asn];
            slot.first += r.packets;
            slot.second.insert(hour);
        }
        sink(r);
        ++next_id;
    };

    for (const auto& plan : plans) {
        switch (plan.kind) {
            case CampaignKind::persistent_scanner: {
                auto split = scanner_port_packets(plan.spec->packets_per_hour,
                                                  plan.ports.size());
                for (int64_t h = 0; h < window_hours; ++h) {
                    for (size_t j = 0; j < plan.ports.size(); ++j) {
                        uint16_t port = plan.ports[j];
                        bool telnet = port == 23 || port == 2323;
                        emit(plan, port, split[j], h, "tcp", true, false,
                             parse_tcp_flags("S"), true, false, telnet);
                    }
                }
                break;
            }
            case CampaignKind::bursty_spike:
                emit(plan, plan.ports[0], plan.volume, plan.spike_hour, "tcp", true,
                     false, parse_tcp_flags("S"), false, false, false);
                break;
            case CampaignKind::coordinated_surge:
                for (uint16_t port : plan.ports) {
                    emit(plan, port, plan.spec->packets_per_record, plan.spike_hour,
                         "tcp", true, false, parse_tcp_flags("S"), false, false, true);
                }
                break;
            case CampaignKind::backscatter_victim: {
                uint64_t per_record = plan.volume / plan.records;
                for (uint64_t i = 0; i < plan.records; ++i) {
                    auto hour = static_cast<int64_t>(rng.below(config.window_hours));
                    const char* flags = (i % 5 == 0) ? "RA" : "SA";
                    emit(plan, plan.ports[i % plan.ports.size()], per_record, hour,
                         "tcp", true, false, parse_tcp_flags(flags), false, false,
                         false);
                }
                break;
            }
            case CampaignKind::background_noise: {
                uint64_t base = plan.volume / plan.records;
                uint64_t extra = plan.volume % plan.records;
                for (uint64_t i = 0; i < plan.records; ++i) {
                    uint64_t packets = base + (i < extra ? 1 : 0);
                    auto hour = static_cast<int64_t>(rng.below(config.window_hours));
                    uint64_t proto = rng.below(100);
                    uint64_t fp = rng.below(100);
                    uint16_t port = plan.ports[i % plan.ports.size()];
                    if (proto < 5) {
                        emit(plan, port, packets, hour, "icmp", false, true,
                             std::nullopt, false, false, false);
                    } else if (proto < 8) {
                        // flag column absent: stays outside backscatter
                        // classification
                        emit(plan, port, packets, hour, "tcp", true, false,
                             std::nullopt, false, fp < 2, false);
                    } else {
                        emit(plan, port, packets, hour, "tcp", true, false,
                             parse_tcp_flags("S"), fp < 2, false, false);
                    }
                }
                break;
            }
        }
    }

    // ground truth scanners: sources whose emitted distinct ports reach 5.
    // Round-robin emission touches the first min(records, ports) list slots.
    for (const auto& plan : plans) {
        size_t covered = std::min<size_t>(plan.records, plan.ports.size());
        std::set<uint16_t> distinct(plan.ports.begin(),
                                    plan.ports.begin() + covered);
        if (distinct.size() >= 5) truth.scanner_sources.push_back(plan.ip);
    }
    std::sort(truth.scanner_sources.begin(), truth.scanner_sources.end());
    truth.records_emitted = next_id;
    truth.asn_class = planted_class;

    // generation-time check: planted classes must hold under default
    // thresholds on the emitted aggregates
    BurstinessThresholds defaults;
    for (const auto& [asn, intended] : planted_class) {
        const auto& [packets, hours] = planted_activity[asn];
        double ratio = static_cast<double>(hours.size()) /
                       static_cast<double>(config.window_hours);
        auto label = classify_one(packets, ratio, defaults);
        if (label != intended) {
            throw usage_error(std::string("invalid_config: ASN ") +
                              std::to_string(asn) + " planted as " +
                              intended_class_name(intended) + " but classifies as " +
                              std::string(to_string(label)));
        }
    }
    return truth;
}

GroundTruth generate_csv(const SynthConfig& config, std::ostream& corpus_out) {
    write_corpus_header(corpus_out);
    return generate(config, [&](const ConnectionRecord& r) {
        write_corpus_record(corpus_out, r);
    });
}

std::pair<std::vector<ConnectionRecord>, GroundTruth> generate_records(
    const SynthConfig& config) {
    std::vector<ConnectionRecord> records;
    GroundTruth truth =
        generate(config, [&](const ConnectionRecord& r) { records.push_back(r); });
    return {std::move(records), std::move(truth)};
}

namespace {

ordered_json campaign_to_json(const CampaignSpec& c) {
    ordered_json j;
    j["kind"] = std::string(to_string(c.kind));
    j["sources"] = c.sources;
    if (!c.ports.empty()) j["ports"] = c.ports;
    if (c.packets_per_hour) j["packets_per_hour"] = c.packets_per_hour;
    if (c.spike_hour >= 0) j["spike_hour"] = c.spike_hour;
    if (c.spike_packets) j["spike_packets"] = c.spike_packets;
    if (c.packets_per_record) j["packets_per_record"] = c.packets_per_record;
    if (c.port_pool) j["port_pool"] = c.port_pool;
    if (c.ports_per_source) j["ports_per_source"] = c.ports_per_source;
    if (c.records_per_source) j["records_per_source"] = c.records_per_source;
    if (c.asn) j["asn"] = c.asn;
    if (c.asn_base) j["asn_base"] = c.asn_base;
    if (!c.country.empty()) j["country"] = c.country;
    return j;
}

template <typename T>
T get_field(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw usage_error(std::string("invalid_config: bad value for '") + key + "'");
    }
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) {
            throw usage_error(std::string("invalid_config: unknown key '") + it.key() +
                              "' in " + where);
        }
    }
}

}  // namespace

std::string config_to_json(const SynthConfig& config) {
    ordered_json j;
    j["seed"] = config.seed;
    j["window_hours"] = config.window_hours;
    j["window_start_epoch"] = config.window_start_epoch;
    j["target_top1pct_share"] = config.target_top1pct_share;
    if (config.target_records) j["target_records"] = config.target_records;
    j["pareto_alpha"] = config.pareto_alpha;
    j["pareto_min"] = config.pareto_min;
    j["pareto_cap"] = config.pareto_cap;
    j["background_asn_pool"] = config.background_asn_pool;
    j["campaigns"] = ordered_json::array();
    for (const auto& c : config.campaigns) j["campaigns"].push_back(campaign_to_json(c));
    return j.dump(2);
}

SynthConfig load_synth_config(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw usage_error(std::string("invalid_config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw usage_error("invalid_config: top level must be an object");
    reject_unknown_keys(j,
                        {"seed", "window_hours", "window_start_epoch",
                         "target_top1pct_share", "target_records", "campaigns",
                         "pareto_alpha", "pareto_min", "pareto_cap",
                         "background_asn_pool", "n_sources"},
                        "config");

    SynthConfig config;
    if (!j.contains("seed")) {
        // no implicit seed for file-driven runs; reproducibility is the point
        throw usage_error("invalid_config: seed is required");
    }
    config.seed = get_field<uint64_t>(j, "seed", config.seed);
    config.window_hours = get_field<uint64_t>(j, "window_hours", config.window_hours);
    config.window_start_epoch =
        get_field<int64_t>(j, "window_start_epoch", config.window_start_epoch);
    config.target_top1pct_share =
        get_field<double>(j, "target_top1pct_share", config.target_top1pct_share);
    config.target_records =
        get_field<uint64_t>(j, "target_records", config.target_records);
    config.pareto_alpha = get_field<double>(j, "pareto_alpha", config.pareto_alpha);
    config.pareto_min = get_field<uint64_t>(j, "pareto_min", config.pareto_min);
    config.pareto_cap = get_field<uint64_t>(j, "pareto_cap", config.pareto_cap);
    config.background_asn_pool =
        get_field<uint32_t>(j, "background_asn_pool", config.background_asn_pool);

    if (!j.contains("campaigns") || !j.at("campaigns").is_array()) {
        throw usage_error("invalid_config: campaigns array required");
    }
    for (const auto& cj : j.at("campaigns")) {
        if (!cj.is_object()) throw usage_error("invalid_config: campaign must be object");
        reject_unknown_keys(cj,
                            {"kind", "sources", "ports", "packets_per_hour",
                             "spike_hour", "spike_packets", "packets_per_record",
                             "port_pool", "ports_per_source", "records_per_source",
                             "asn", "asn_base", "country"},
                            "campaign");
        CampaignSpec c;
        auto kind_text = get_field<std::string>(cj, "kind", "");
        auto kind = parse_campaign_kind(kind_text);
        if (!kind) throw usage_error("invalid_config: unknown campaign kind '" +
                                     kind_text + "'");
        c.kind = *kind;
        c.sources = get_field<uint64_t>(cj, "sources", 0);
        c.ports = get_field<std::vector<uint16_t>>(cj, "ports", {});
        c.packets_per_hour = get_field<uint64_t>(cj, "packets_per_hour", 0);
        c.spike_hour = get_field<int64_t>(cj, "spike_hour", -1);
        c.spike_packets = get_field<uint64_t>(cj, "spike_packets", 0);
        c.packets_per_record = get_field<uint64_t>(cj, "packets_per_record", 0);
        c.port_pool = get_field<uint32_t>(cj, "port_pool", 0);
        c.ports_per_source = get_field<uint32_t>(cj, "ports_per_source", 0);
        c.records_per_source = get_field<uint64_t>(cj, "records_per_source", 0);
        c.asn = get_field<uint32_t>(cj, "asn", 0);
        c.asn_base = get_field<uint32_t>(cj, "asn_base", 0);
        c.country = get_field<std::string>(cj, "country", "");
        config.campaigns.push_back(std::move(c));
    }
    if (j.contains("n_sources")) {
        uint64_t declared = j.at("n_sources").get<uint64_t>();
        uint64_t actual = 0;
        for (const auto& c : config.campaigns) actual += c.sources;
        if (declared != actual) {
            throw usage_error("invalid_config: n_sources " + std::to_string(declared) +
                              " does not match campaign total " + std::to_string(actual));
        }
    }
    validate_config(config);
    return config;
}

SynthConfig load_synth_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open config file: " + path);
    return load_synth_config(in);
}

void write_ground_truth(std::ostream& out, const GroundTruth& truth,
                        const SynthConfig& config) {
    ordered_json j;
    j["generator"]["algorithm"] = "splitmix64";
    j["generator"]["seed"] = config.seed;
    j["generator"]["config"] = ordered_json::parse(config_to_json(config));
    j["records_emitted"] = truth.records_emitted;
    j["packets_emitted"] = truth.packets_emitted;
    auto scanners = ordered_json::array();
    for (const auto& ip : truth.scanner_sources) scanners.push_back(format_ipv4(ip));
    j["scanner_sources"] = std::move(scanners);
    j["backscatter_record_ids"] = truth.backscatter_record_ids;
    ordered_json classes;
    for (const auto& [asn, label] : truth.asn_class) {
        classes[std::to_string(asn)] = std::string(to_string(label));
    }
    j["asn_class"] = std::move(classes);
    ordered_json volumes;
    for (const auto& [ip, volume] : truth.per_source_volume) {
        volumes[format_ipv4(ip)] = volume;
    }
    j["per_source_volume"] = std::move(volumes);
    out << j.dump(2) << '\n';
}

GroundTruth load_ground_truth(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw input_error(std::string("malformed ground truth: ") + e.what());
    }
    GroundTruth truth;
    truth.records_emitted = get_field<uint64_t>(j, "records_emitted", 0);
    truth.packets_emitted = get_field<uint64_t>(j, "packets_emitted", 0);
    if (j.contains("scanner_sources")) {
        for (const auto& s : j.at("scanner_sources")) {
            auto ip = parse_ipv4(s.get<std::string>());
            if (!ip) throw input_error("malformed ground truth: bad scanner ip");
            truth.scanner_sources.push_back(*ip);
        }
    }
    if (j.contains("backscatter_record_ids")) {
        truth.backscatter_record_ids =
            j.at("backscatter_record_ids").get<std::vector<uint64_t>>();
    }
    if (j.contains("asn_class")) {
        for (auto it = j.at("asn_class").begin(); it != j.at("asn_class").end(); ++it) {
            auto label = parse_burstiness_label(it.value().get<std::string>());
            if (!label) throw input_error("malformed ground truth: bad asn class");
            truth.asn_class[static_cast<uint32_t>(std::stoul(it.key()))] = *label;
        }
    }
    if (j.contains("per_source_volume")) {
        for (auto it = j.at("per_source_volume").begin();
             it != j.at("per_source_volume").end(); ++it) {
            auto ip = parse_ipv4(it.key());
            if (!ip) throw input_error("malformed ground truth: bad volume ip");
            truth.per_source_volume[*ip] = it.value().get<uint64_t>();
        }
    }
    std::sort(truth.scanner_sources.begin(), truth.scanner_sources.end());
    std::sort(truth.backscatter_record_ids.begin(),
              truth.backscatter_record_ids.end());
    return truth;
}

}  // namespace ibrkit
