#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dnscov/codecs.hpp"
#include "dnscov/dns_record.hpp"
#include "dnscov/errors.hpp"
#include "dnscov/rng.hpp"
#include "dnscov/time.hpp"

namespace dnscov {

/// Shape of one covert-channel tool or malware family: codec, record types,
/// label sizing and query cadence. payload_path optionally feeds real bytes
/// into the channel; otherwise the payload is a seeded random stream.
struct ToolProfile {
    std::string name;
    Codec codec = Codec::Base64;
    std::vector<QueryType> qtypes = {QueryType::TXT};
    std::size_t label_len = 57;
    std::size_t hostname_budget = 230;
    std::string domain;              ///< attacker-controlled base domain
    double query_rate = 120.0;       ///< queries per minute
    std::string client_source = "10.99.0.21";
    double state_query_fraction = 0.0;  ///< short keep-alive share (DNScapy-style)
    std::string payload_path;           ///< optional byte source
    std::string rc4_key = std::string(kDefaultRc4Key);
};

/// Background-traffic shape standing in for a corporate network: dictionary
/// subdomains over a domain corpus, cache-driven repeats, a mix of record
/// types.
struct BenignProfile {
    std::vector<std::string> domain_corpus;
    std::vector<std::string> subdomain_vocab;
    double query_rate = 25000.0 / 60.0;  ///< queries per minute
    std::vector<std::pair<QueryType, double>> qtype_mix = {{QueryType::A, 0.72},
                                                           {QueryType::AAAA, 0.20},
                                                           {QueryType::CNAME, 0.04},
                                                           {QueryType::MX, 0.02},
                                                           {QueryType::TXT, 0.02}};
    double repeat_factor = 0.968;  ///< probability of re-querying a cached name
    int source_count = 48;
    double error_rcode_fraction = 0.02;

    static BenignProfile defaults();
};

constexpr TimestampMs kDefaultGenerationStart = 1672531200000;  // 2023-01-01T00:00:00Z

namespace detail {

inline void append_u32be(Bytes& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

inline int codec_bits(Codec c) {
    switch (c) {
        case Codec::Hex:
        case Codec::CustomRc4: return 4;
        case Codec::Base32: return 5;
        case Codec::Base64:
        case Codec::Base64Url: return 6;
        case Codec::Base128: return 7;
    }
    return 8;
}

}  // namespace detail

/// Emits one covert stream at the profile rate. Every data query carries a
/// distinct payload (a sequence counter precedes the random bytes), so
/// qnames never repeat - the cache-avoidance signature of these channels.
/// Keep-alive state queries, when configured, are single short labels.
inline std::vector<DnsQueryRecord> generate_covert(const ToolProfile& profile,
                                                   DurationMs duration, std::uint64_t seed,
                                                   TimestampMs start = kDefaultGenerationStart) {
    if (profile.domain.empty()) throw ConfigError("tool profile needs a domain");
    if (profile.label_len == 0 || profile.label_len > kMaxLabelChars)
        throw ConfigError("label_len must be in 1..63");
    if (profile.hostname_budget > kMaxHostnameChars)
        throw ConfigError("hostname_budget must be <= 253");

    Bytes file_payload;
    if (!profile.payload_path.empty()) {
        std::ifstream in(profile.payload_path, std::ios::binary);
        if (!in) throw ConfigError("cannot open payload file: " + profile.payload_path);
        file_payload.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        if (file_payload.empty()) throw ConfigError("payload file is empty");
    }

    const std::uint64_t count = static_cast<std::uint64_t>(
        static_cast<double>(duration) / kMillisPerMinute * profile.query_rate);
    std::vector<DnsQueryRecord> out;
    out.reserve(count);
    if (count == 0) return out;

    Rng rng(seed);
    const double interval = static_cast<double>(duration) / static_cast<double>(count);

    // chars available for payload labels inside the budget
    const std::size_t overhead = profile.domain.size() + 1;
    if (profile.hostname_budget <= overhead + profile.label_len)
        throw ConfigError("hostname_budget too small for domain plus one label");
    const std::size_t avail = profile.hostname_budget - overhead;
    const std::size_t n_labels = std::max<std::size_t>(1, (avail + 1) / (profile.label_len + 1));
    const std::size_t target_chars = n_labels * profile.label_len;
    const int bits = detail::codec_bits(profile.codec);
    const std::size_t payload_bytes = target_chars * static_cast<std::size_t>(bits) / 8;

    std::size_t file_pos = 0;
    for (std::uint64_t k = 0; k < count; ++k) {
        DnsQueryRecord rec;
        const double jitter = rng.unit() * 0.9 * interval;
        rec.timestamp = start + static_cast<TimestampMs>(static_cast<double>(k) * interval + jitter);
        rec.source = profile.client_source;
        rec.rcode = 0;
        const QueryType qt =
            profile.qtypes.size() == 1
                ? profile.qtypes.front()
                : profile.qtypes[rng.below(profile.qtypes.size())];
        rec.qtype = {qt, 0};

        Bytes payload;
        const bool state_query = rng.chance(profile.state_query_fraction);
        if (state_query) {
            // 2 bytes -> at most 4 encoded chars: below any payload label size
            detail::append_u32be(payload, static_cast<std::uint32_t>(k));
            payload.erase(payload.begin(), payload.begin() + 2);
        } else {
            detail::append_u32be(payload, static_cast<std::uint32_t>(k));
            std::size_t want = payload_bytes > 4 ? payload_bytes - 4 : 0;
            if (file_payload.empty()) {
                const std::size_t at = payload.size();
                payload.resize(at + want);
                rng.fill_bytes(payload.data() + at, want);
            } else {
                while (want--) {
                    payload.push_back(file_payload[file_pos]);
                    file_pos = (file_pos + 1) % file_payload.size();
                }
            }
        }
        const auto labels =
            encode_payload(payload, profile.codec, profile.label_len, profile.rc4_key);
        std::string qname;
        for (const auto& l : labels) {
            qname += l;
            qname += '.';
        }
        qname += profile.domain;
        rec.qname = std::move(qname);
        out.push_back(std::move(rec));
    }
    return out;
}

inline BenignProfile BenignProfile::defaults() {
    BenignProfile p;
    p.domain_corpus = {
        // ordinary external services
        "acme-portal.com",    "bluewave-tech.net",   "cloudledger.io",     "datapond.net",
        "edgeworks-app.com",  "fastmailer.org",      "greenfield-erp.com", "helioprint.net",
        "insightboard.io",    "jetstream-cdn.org",   "kiteweather.com",    "lumenbooks.net",
        "metroparts.com",     "nordvik-design.net",  "orbit-crm.com",      "packtrace.io",
        "quartzpay.com",      "riversidehotel.net",  "skylinemedia.org",   "trailmaps.io",
        "unisonchat.com",     "vortexgames.net",     "willowbank.org",     "xenonlabs.io",
        "yellowcab-app.com",  "zenithhealth.org",    "brioschi-forni.it",  "caffemilano.it",
        "ferramenta-rossi.it", "libreriadante.it",
        // a sprinkle of traffic the filters should remove
        "google.com",         "microsoft.com",       "facebook.com",
        "img-cache.cloudfront.net", "static-pool.akamai.net",
        "fileshare.corp",     "printers.internal",
    };
    p.subdomain_vocab = {
        "www",       "mail",      "smtp",      "imap",       "webmail",   "autodiscover",
        "portal",    "intranet",  "gateway",   "services",   "accounts",  "account",
        "login",     "signin",    "dashboard", "analytics",  "metrics",   "telemetry",
        "updates",   "update",    "download",  "downloads",  "packages",  "mirror",
        "static",    "images",    "assets",    "content",    "media",     "stream",
        "video",     "player",    "search",    "index",      "catalog",   "products",
        "orders",    "checkout",  "payment",   "payments",   "invoice",   "billing",
        "support",   "helpdesk",  "status",    "monitor",    "monitoring", "reports",
        "calendar",  "contacts",  "directory", "profile",    "settings",  "preferences",
        "archive",   "backup",    "storage",   "documents",  "projects",  "research",
        "training",  "learning",  "library",   "newsroom",   "weather",   "forecast",
        "mobile",    "desktop",   "secure",    "partner",    "partners",  "vendors",
        "customer",  "customers", "booking",   "reserve",    "tracking",  "shipping",
        "delivery",  "inventory", "warehouse", "logistics",  "finance",   "treasury",
        "marketing", "campaign",  "newsletter", "community", "forum",     "feedback",
        "posta",     "ufficio",   "servizi",   "clienti",    "negozio",   "fattura",
        "magazzino", "progetti",  "documenti", "archivio",   "assistenza", "fornitori",
    };
    return p;
}

/// Emits background traffic: cached-name repeats dominate, new names appear
/// at roughly (1 - repeat_factor) of the rate, sources are a fixed pool.
inline std::vector<DnsQueryRecord> generate_benign(const BenignProfile& profile,
                                                   DurationMs duration, std::uint64_t seed,
                                                   TimestampMs start = kDefaultGenerationStart) {
    if (profile.domain_corpus.empty() || profile.subdomain_vocab.empty())
        throw ConfigError("benign profile needs a domain corpus and a vocabulary");
    double mix_total = 0.0;
    for (const auto& [qt, w] : profile.qtype_mix) mix_total += w;
    if (mix_total <= 0.0) throw ConfigError("qtype_mix must have positive total weight");

    const std::uint64_t count = static_cast<std::uint64_t>(
        static_cast<double>(duration) / kMillisPerMinute * profile.query_rate);
    std::vector<DnsQueryRecord> out;
    out.reserve(count);
    if (count == 0) return out;

    Rng rng(seed);
    std::vector<std::string> sources;
    sources.reserve(profile.source_count);
    for (int i = 0; i < profile.source_count; ++i) {
        sources.push_back("10.20." + std::to_string(1 + i / 200) + "." +
                          std::to_string(10 + i % 200));
    }

    std::vector<std::string> pool;  // every distinct qname minted so far
    std::unordered_set<std::string> pool_index;
    auto mint_name = [&]() -> std::string {
        for (int attempt = 0; attempt < 8; ++attempt) {
            const auto& domain = profile.domain_corpus[rng.below(profile.domain_corpus.size())];
            const auto& word = profile.subdomain_vocab[rng.below(profile.subdomain_vocab.size())];
            std::string sub = word;
            if (rng.chance(0.30)) sub += std::to_string(rng.between(1, 99));
            if (rng.chance(0.12))
                sub += "-" + profile.subdomain_vocab[rng.below(profile.subdomain_vocab.size())];
            std::string qname = sub + "." + domain;
            if (qname.size() <= kMaxHostnameChars && pool_index.insert(qname).second) {
                pool.push_back(qname);
                return qname;
            }
        }
        // saturated pocket of the name space: extend with a counter
        std::string qname = "h" + std::to_string(pool.size()) + "-" +
                            profile.subdomain_vocab[rng.below(profile.subdomain_vocab.size())] +
                            "." + profile.domain_corpus[rng.below(profile.domain_corpus.size())];
        pool_index.insert(qname);
        pool.push_back(qname);
        return qname;
    };

    const double interval = static_cast<double>(duration) / static_cast<double>(count);
    for (std::uint64_t k = 0; k < count; ++k) {
        DnsQueryRecord rec;
        const double jitter = rng.unit() * 0.9 * interval;
        rec.timestamp = start + static_cast<TimestampMs>(static_cast<double>(k) * interval + jitter);
        rec.source = sources[rng.below(sources.size())];

        const bool repeat = !pool.empty() && rng.chance(profile.repeat_factor);
        rec.qname = repeat ? pool[rng.below(pool.size())] : mint_name();

        double roll = rng.unit() * mix_total;
        QueryType qt = profile.qtype_mix.back().first;
        for (const auto& [t, w] : profile.qtype_mix) {
            if (roll < w) {
                qt = t;
                break;
            }
            roll -= w;
        }
        rec.qtype = {qt, 0};
        rec.rcode = rng.chance(profile.error_rcode_fraction) ? 3 : 0;
        out.push_back(std::move(rec));
    }
    return out;
}

/// Stable merge of several record streams into timestamp order.
inline std::vector<DnsQueryRecord> merge_by_timestamp(
    std::vector<std::vector<DnsQueryRecord>> streams) {
    std::vector<DnsQueryRecord> out;
    std::size_t total = 0;
    for (const auto& s : streams) total += s.size();
    out.reserve(total);
    for (auto& s : streams)
        out.insert(out.end(), std::make_move_iterator(s.begin()),
                   std::make_move_iterator(s.end()));
    std::stable_sort(out.begin(), out.end(),
                     [](const DnsQueryRecord& a, const DnsQueryRecord& b) {
                         return a.timestamp < b.timestamp;
                     });
    return out;
}

/// Built-in tool and malware emulation profiles, keyed by name. Domains for
/// the malware profiles are the published indicators associated with each
/// family; tool profiles use neutral test domains.
inline std::map<std::string, ToolProfile> builtin_tool_profiles() {
    std::map<std::string, ToolProfile> m;
    auto put = [&](ToolProfile p) { m[p.name] = std::move(p); };

    put({.name = "iodine", .codec = Codec::Base128, .qtypes = {QueryType::Null},
         .label_len = 60, .hostname_budget = 230, .domain = "tunnel-probe.net",
         .query_rate = 150.0, .client_source = "10.99.0.21"});
    put({.name = "dnscat2", .codec = Codec::Hex, .qtypes = {QueryType::TXT},
         .label_len = 60, .hostname_budget = 220, .domain = "c2-sandbox.org",
         .query_rate = 120.0, .client_source = "10.99.0.22"});
    put({.name = "dns2tcp", .codec = Codec::Base64, .qtypes = {QueryType::TXT},
         .label_len = 56, .hostname_budget = 210, .domain = "relay-probe.net",
         .query_rate = 110.0, .client_source = "10.99.0.23"});
    put({.name = "dnscapy", .codec = Codec::Base64, .qtypes = {QueryType::CNAME, QueryType::TXT},
         .label_len = 50, .hostname_budget = 180, .domain = "scapy-probe.org",
         .query_rate = 140.0, .client_source = "10.99.0.24", .state_query_fraction = 0.8});
    put({.name = "dnsfilexfer", .codec = Codec::Hex, .qtypes = {QueryType::A},
         .label_len = 62, .hostname_budget = 240, .domain = "xfer-probe.net",
         .query_rate = 100.0, .client_source = "10.99.0.25"});
    put({.name = "exfil-aaaa", .codec = Codec::Base64, .qtypes = {QueryType::AAAA},
         .label_len = 58, .hostname_budget = 225, .domain = "exfil-probe.com",
         .query_rate = 90.0, .client_source = "10.99.0.26"});
    put({.name = "yourfreedom", .codec = Codec::Base64, .qtypes = {QueryType::Null},
         .label_len = 54, .hostname_budget = 210, .domain = "freedom-probe.net",
         .query_rate = 130.0, .client_source = "10.99.0.27"});

    put({.name = "pisloader", .codec = Codec::Base32, .qtypes = {QueryType::TXT},
         .label_len = 30, .hostname_budget = 120, .domain = "local.it-desktop.com",
         .query_rate = 40.0, .client_source = "10.99.1.11"});
    put({.name = "ismdoor", .codec = Codec::Base64, .qtypes = {QueryType::AAAA},
         .label_len = 48, .hostname_budget = 160, .domain = "basnevs.com",
         .query_rate = 45.0, .client_source = "10.99.1.12"});
    put({.name = "denis", .codec = Codec::Base64, .qtypes = {QueryType::Null},
         .label_len = 50, .hostname_budget = 170, .domain = "z.teriava.com",
         .query_rate = 50.0, .client_source = "10.99.1.13"});
    put({.name = "carbanak", .codec = Codec::CustomRc4, .qtypes = {QueryType::TXT},
         .label_len = 52, .hostname_budget = 190, .domain = "en.google4-ssl.com",
         .query_rate = 35.0, .client_source = "10.99.1.14"});
    put({.name = "cobalt-strike", .codec = Codec::CustomRc4, .qtypes = {QueryType::TXT},
         .label_len = 56, .hostname_budget = 200, .domain = "update.cisc0.net",
         .query_rate = 60.0, .client_source = "10.99.1.15"});
    put({.name = "bondupdater", .codec = Codec::CustomRc4,
         .qtypes = {QueryType::A, QueryType::TXT}, .label_len = 40, .hostname_budget = 150,
         .domain = "withyourface.com", .query_rate = 30.0, .client_source = "10.99.1.16"});
    put({.name = "udpos", .codec = Codec::CustomRc4, .qtypes = {QueryType::A},
         .label_len = 46, .hostname_budget = 170, .domain = "ns.service-logmeln.network",
         .query_rate = 55.0, .client_source = "10.99.1.17"});
    put({.name = "dnspionage", .codec = Codec::Base32, .qtypes = {QueryType::A},
         .label_len = 40, .hostname_budget = 150, .domain = "microsoftonedrive.org",
         .query_rate = 25.0, .client_source = "10.99.1.18"});
    return m;
}

/// Ground-truth sidecar: one `domain,scenario` line per injected stream.
struct GroundTruthEntry {
    std::string domain;    ///< lowercased
    std::string scenario;  ///< defaults to the domain when unnamed
};

inline void write_ground_truth(std::ostream& os, const std::vector<GroundTruthEntry>& entries) {
    for (const auto& e : entries)
        os << e.domain << ',' << (e.scenario.empty() ? e.domain : e.scenario) << '\n';
}

inline std::vector<GroundTruthEntry> read_ground_truth(std::istream& in) {
    std::vector<GroundTruthEntry> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        GroundTruthEntry e;
        if (comma == std::string::npos) {
            e.domain = to_lower(line);
            e.scenario = e.domain;
        } else {
            e.domain = to_lower(line.substr(0, comma));
            e.scenario = line.substr(comma + 1);
        }
        out.push_back(std::move(e));
    }
    return out;
}

}  // namespace dnscov
