#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "dnscov/dns_record.hpp"
#include "dnscov/errors.hpp"
#include "dnscov/hostname.hpp"
#include "dnscov/jaro_winkler.hpp"

namespace dnscov {

/// Constants of the advanced-analytics stage. Defaults are the calibrated
/// operating point of the engine.
struct AnalyticsConfig {
    double b = 0.33;                     ///< rescaling offset
    double c = 0.067;                    ///< rescaling log coefficient (base 10)
    double a_threshold = 0.25;           ///< suspicious iff rescaled A strictly above
    int subwindow_count = 10;            ///< sub-windows per analysis window
    double entropy_alphabet_bits = 6.0;  ///< log2(64), entropy normalization cap
    int bigram_top_k = 30;               ///< rank-string truncation for bigrams
};

/// Reference character statistics of one natural language, used by the
/// n-gram distance indicator. Rank strings list symbols by descending
/// frequency (ties lexicographic).
struct LanguageProfile {
    std::string language;  ///< "english" | "italian"
    std::map<char, double> monogram_freq;
    std::map<std::string, double> bigram_freq;
    std::string rank_string_mono;
    std::vector<std::string> rank_string_bi;  ///< top-K bigrams

    /// Loads a `symbol<TAB>probability` file. Probabilities are normalized
    /// to sum exactly to 1. order is 1 for monograms, 2 for bigrams.
    static void load_order(LanguageProfile& p, std::istream& in, int order, int top_k) {
        std::map<std::string, double> freqs;
        std::string line;
        double sum = 0.0;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty() || line[0] == '#') continue;
            const auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ConfigError("language profile line lacks a tab: '" + line + "'");
            std::string sym = line.substr(0, tab);
            if (static_cast<int>(sym.size()) != order)
                throw ConfigError("profile symbol '" + sym + "' is not a " +
                                  std::to_string(order) + "-gram");
            double prob = 0.0;
            try {
                prob = std::stod(line.substr(tab + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad probability in profile line: '" + line + "'");
            }
            if (prob <= 0.0) throw ConfigError("nonpositive probability for '" + sym + "'");
            if (!freqs.emplace(sym, prob).second)
                throw ConfigError("duplicate profile symbol '" + sym + "'");
            sum += prob;
        }
        if (freqs.empty()) throw ConfigError("empty language profile");
        for (auto& [sym, prob] : freqs) prob /= sum;

        std::vector<std::pair<std::string, double>> ranked(freqs.begin(), freqs.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });

        if (order == 1) {
            p.monogram_freq.clear();
            p.rank_string_mono.clear();
            for (const auto& [sym, prob] : ranked) {
                p.monogram_freq[sym[0]] = prob;
                p.rank_string_mono += sym[0];
            }
        } else {
            p.bigram_freq.clear();
            p.rank_string_bi.clear();
            for (const auto& [sym, prob] : ranked) {
                p.bigram_freq[sym] = prob;
                if (static_cast<int>(p.rank_string_bi.size()) < top_k)
                    p.rank_string_bi.push_back(sym);
            }
        }
    }

    static LanguageProfile load_files(const std::string& language, const std::string& mono_path,
                                      const std::string& bi_path, int top_k) {
        LanguageProfile p;
        p.language = language;
        std::ifstream mono(mono_path);
        if (!mono) throw ConfigError("cannot open language profile: " + mono_path);
        load_order(p, mono, 1, top_k);
        std::ifstream bi(bi_path);
        if (!bi) throw ConfigError("cannot open language profile: " + bi_path);
        load_order(p, bi, 2, top_k);
        return p;
    }
};

/// Tail thresholds learned from the offline period. Counts are taken over
/// sub-window-sized buckets so that online sub-window counts compare
/// against the same observation unit.
struct BaselineDistributions {
    bool built = false;
    double unique_requests_p90 = 0.0;   ///< per (source, domain) unique qnames per bucket
    double unique_hostnames_p90 = 0.0;  ///< per domain distinct hostnames per bucket
    std::string built_from;
};

/// Nearest-rank percentile of a count sample (q in (0, 1]).
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) return 0.0;
    std::sort(values.begin(), values.end());
    const std::size_t rank =
        std::min(values.size(), static_cast<std::size_t>(
                                    std::ceil(q * static_cast<double>(values.size()))));
    return values[rank == 0 ? 0 : rank - 1];
}

/// Per-source accounting over one analysis window. per_domain maps are
/// keyed by lowercased registered domain; the subcount series hold one
/// entry per sub-window.
struct SourceWindowStats {
    std::string source;
    TimestampMs window_start = 0;
    TimestampMs window_end = 0;
    std::uint64_t n_tot = 0;  ///< all queries from the source, pre-filter
    std::uint64_t n_s = 0;    ///< queries flagged nonconforming by the classifier
    std::map<std::string, std::uint32_t> per_domain_unique_requests;
    std::map<std::string, std::uint32_t> per_domain_unique_hostnames;
    std::map<std::string, std::vector<std::uint32_t>> per_domain_request_subcounts;
};

/// Domain-level accounting (hostname diversity is a property of the domain,
/// not of a single source).
struct DomainWindowStats {
    std::string domain;
    std::vector<std::uint32_t> hostname_subcounts;
};

namespace detail {

inline double tail_fraction(const std::vector<std::uint32_t>& subcounts, double threshold,
                            int subwindow_count) {
    std::uint32_t above = 0;
    for (std::uint32_t v : subcounts)
        if (static_cast<double>(v) > threshold) ++above;
    return static_cast<double>(above) / static_cast<double>(subwindow_count);
}

}  // namespace detail

/// i_r: fraction of sub-windows in which the (source, domain) unique-request
/// count exceeds the baseline 90th percentile.
inline double indicator_unique_requests(const SourceWindowStats& stats, const std::string& domain,
                                        const BaselineDistributions& baseline,
                                        const AnalyticsConfig& cfg) {
    if (!baseline.built) throw EmptyBaseline();
    const auto it = stats.per_domain_request_subcounts.find(domain);
    if (it == stats.per_domain_request_subcounts.end()) return 0.0;
    return detail::tail_fraction(it->second, baseline.unique_requests_p90, cfg.subwindow_count);
}

/// i_h: same construction over per-domain distinct-hostname counts.
inline double indicator_unique_hostnames(const DomainWindowStats& stats,
                                         const BaselineDistributions& baseline,
                                         const AnalyticsConfig& cfg) {
    if (!baseline.built) throw EmptyBaseline();
    return detail::tail_fraction(stats.hostname_subcounts, baseline.unique_hostnames_p90,
                                 cfg.subwindow_count);
}

/// Shannon entropy in bits of the byte histogram of s.
inline double shannon_entropy(std::string_view s) {
    if (s.empty()) return 0.0;
    std::array<std::uint32_t, 256> hist{};
    for (const char c : s) ++hist[static_cast<unsigned char>(c)];
    double h = 0.0;
    const double n = static_cast<double>(s.size());
    for (const std::uint32_t count : hist) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return h;
}

/// i_e: max of the entropy of the whole subdomain (separators excluded) and
/// of its longest label, normalized by the alphabet capacity and clamped
/// to 1.
inline double indicator_entropy(const ParsedHostname& parsed, const AnalyticsConfig& cfg) {
    if (!parsed.has_subdomain()) throw EmptySubdomain();
    std::string joined;
    for (const auto& label : parsed.subdomain_labels) joined += label;
    const double h = std::max(shannon_entropy(joined),
                              shannon_entropy(parsed.longest_subdomain_label));
    return std::min(1.0, h / cfg.entropy_alphabet_bits);
}

namespace detail {

/// Symbols of a frequency table ordered by descending count, ties broken
/// lexicographically.
template <typename Sym>
std::vector<Sym> rank_symbols(const std::map<Sym, std::uint32_t>& freq, std::size_t top_k) {
    std::vector<std::pair<Sym, std::uint32_t>> items(freq.begin(), freq.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<Sym> out;
    for (const auto& [sym, count] : items) {
        if (out.size() >= top_k) break;
        out.push_back(sym);
    }
    return out;
}

inline std::string mono_rank_string(std::string_view s) {
    std::map<char, std::uint32_t> freq;
    for (const char c : s) ++freq[c];
    const auto ranked = rank_symbols(freq, s.size());
    return std::string(ranked.begin(), ranked.end());
}

/// Bigrams are taken within labels only; a separator never forms a bigram.
inline std::vector<std::string> bigram_rank_string(const std::vector<std::string>& labels,
                                                   std::size_t top_k) {
    std::map<std::string, std::uint32_t> freq;
    for (const auto& label : labels)
        for (std::size_t i = 0; i + 1 < label.size(); ++i) ++freq[label.substr(i, 2)];
    return rank_symbols(freq, top_k);
}

inline double rank_distance(std::string_view a, std::string_view b) {
    return 1.0 - jaro_winkler_similarity(a, b);
}

inline double rank_distance(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    return 1.0 - jaro_winkler_similarity(std::span<const std::string>(a.data(), a.size()),
                                          std::span<const std::string>(b.data(), b.size()));
}

}  // namespace detail

/// i_d: Jaro-Winkler distance between the subdomain's frequency-rank strings
/// and each language's, per (language, n-gram order) the maximum over the
/// whole subdomain and its longest label, averaged over all four
/// combinations. Rank strings are built over the lowercased subdomain; the
/// case signal is carried by the uppercase-ratio feature instead.
inline double indicator_language_distance(const ParsedHostname& parsed,
                                          const std::vector<LanguageProfile>& profiles,
                                          const AnalyticsConfig& cfg) {
    if (!parsed.has_subdomain()) throw EmptySubdomain();
    if (profiles.empty()) throw ConfigError("no language profiles loaded");

    std::vector<std::string> labels_lower;
    std::string joined_lower;
    for (const auto& label : parsed.subdomain_labels) {
        labels_lower.push_back(to_lower(label));
        joined_lower += labels_lower.back();
    }
    const std::string longest_lower = to_lower(parsed.longest_subdomain_label);

    const std::string sub_mono = detail::mono_rank_string(joined_lower);
    const std::string label_mono = detail::mono_rank_string(longest_lower);
    const std::size_t top_k = static_cast<std::size_t>(cfg.bigram_top_k);
    const auto sub_bi = detail::bigram_rank_string(labels_lower, top_k);
    const auto label_bi = detail::bigram_rank_string({longest_lower}, top_k);

    double total = 0.0;
    for (const auto& profile : profiles) {
        const double d_mono = std::max(detail::rank_distance(sub_mono, profile.rank_string_mono),
                                       detail::rank_distance(label_mono, profile.rank_string_mono));
        const double d_bi = std::max(detail::rank_distance(sub_bi, profile.rank_string_bi),
                                     detail::rank_distance(label_bi, profile.rank_string_bi));
        total += d_mono + d_bi;
    }
    return total / static_cast<double>(2 * profiles.size());
}

struct AnomalyIndex {
    double raw = 0.0;
    double rescaled = 0.0;
};

/// A = mean of the four indicators; per-source rescaling
/// A -> min(1, A + b + c*log10(n_s/n_tot)), floored at 0. Requires
/// 1 <= n_s <= n_tot.
inline AnomalyIndex anomaly_index(double i_r, double i_h, double i_e, double i_d,
                                  std::uint64_t n_s, std::uint64_t n_tot,
                                  const AnalyticsConfig& cfg) {
    if (n_s < 1 || n_s > n_tot) throw InvalidCounts(n_s, n_tot);
    AnomalyIndex out;
    out.raw = (i_r + i_h + i_e + i_d) / 4.0;
    const double ratio = static_cast<double>(n_s) / static_cast<double>(n_tot);
    const double shifted = out.raw + cfg.b + cfg.c * std::log10(ratio);
    out.rescaled = std::clamp(shifted, 0.0, 1.0);
    return out;
}

enum class Verdict { Suspicious, Cleared };

inline std::string_view to_string(Verdict v) {
    return v == Verdict::Suspicious ? "suspicious" : "cleared";
}

/// Verdict is suspicious only when the rescaled index strictly exceeds the
/// threshold.
inline Verdict verdict_for(double rescaled_a, const AnalyticsConfig& cfg) {
    return rescaled_a > cfg.a_threshold ? Verdict::Suspicious : Verdict::Cleared;
}

/// Full per-query assessment for one classifier-flagged query.
struct AnomalyReport {
    std::uint64_t record_id = 0;
    std::string source;
    std::string domain;  ///< lowercased registered domain
    std::string qname;
    QueryType qtype = QueryType::Other;
    double i_r = 0.0, i_h = 0.0, i_e = 0.0, i_d = 0.0;
    double raw_a = 0.0;
    double rescaled_a = 0.0;
    Verdict verdict = Verdict::Cleared;
    std::uint64_t n_s = 0;
    std::uint64_t n_tot = 0;
};

/// Assembles indicators and indices for one query already flagged
/// nonconforming by the classifier stage.
inline AnomalyReport classify_query(std::uint64_t record_id, const DnsQueryRecord& record,
                                    const ParsedHostname& parsed,
                                    const SourceWindowStats& stats,
                                    const DomainWindowStats& domain_stats,
                                    const BaselineDistributions& baseline,
                                    const std::vector<LanguageProfile>& profiles,
                                    const AnalyticsConfig& cfg) {
    AnomalyReport r;
    r.record_id = record_id;
    r.source = record.source;
    r.domain = to_lower(parsed.registered_domain);
    r.qname = record.qname;
    r.qtype = record.qtype.type;
    r.i_r = indicator_unique_requests(stats, r.domain, baseline, cfg);
    r.i_h = indicator_unique_hostnames(domain_stats, baseline, cfg);
    r.i_e = indicator_entropy(parsed, cfg);
    r.i_d = indicator_language_distance(parsed, profiles, cfg);
    r.n_s = stats.n_s;
    r.n_tot = stats.n_tot;
    const AnomalyIndex idx = anomaly_index(r.i_r, r.i_h, r.i_e, r.i_d, r.n_s, r.n_tot, cfg);
    r.raw_a = idx.raw;
    r.rescaled_a = idx.rescaled;
    r.verdict = verdict_for(r.rescaled_a, cfg);
    return r;
}

inline nlohmann::json to_json(const AnomalyReport& r) {
    nlohmann::json j;
    j["record_id"] = r.record_id;
    j["source"] = r.source;
    j["domain"] = r.domain;
    j["qname"] = r.qname;
    j["qtype"] = std::string(to_string(r.qtype));
    j["i_r"] = r.i_r;
    j["i_h"] = r.i_h;
    j["i_e"] = r.i_e;
    j["i_d"] = r.i_d;
    j["raw_A"] = r.raw_a;
    j["rescaled_A"] = r.rescaled_a;
    j["verdict"] = std::string(to_string(r.verdict));
    j["n_s"] = r.n_s;
    j["n_tot"] = r.n_tot;
    return j;
}

inline AnomalyReport report_from_json(const nlohmann::json& j) {
    AnomalyReport r;
    r.record_id = j.at("record_id").get<std::uint64_t>();
    r.source = j.at("source").get<std::string>();
    r.domain = j.at("domain").get<std::string>();
    r.qname = j.at("qname").get<std::string>();
    r.qtype = query_type_from_string(j.at("qtype").get<std::string>()).type;
    r.i_r = j.at("i_r").get<double>();
    r.i_h = j.at("i_h").get<double>();
    r.i_e = j.at("i_e").get<double>();
    r.i_d = j.at("i_d").get<double>();
    r.raw_a = j.at("raw_A").get<double>();
    r.rescaled_a = j.at("rescaled_A").get<double>();
    r.verdict = j.at("verdict").get<std::string>() == "suspicious" ? Verdict::Suspicious
                                                                   : Verdict::Cleared;
    r.n_s = j.at("n_s").get<std::uint64_t>();
    r.n_tot = j.at("n_tot").get<std::uint64_t>();
    return r;
}

}  // namespace dnscov
