#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dnscov/dns_record.hpp"
#include "dnscov/hostname.hpp"

namespace dnscov {

/// Pre-filter configuration. Suffix sets are stored lowercase; matching is
/// done on label boundaries against the lowercased qname.
struct FilterConfig {
    std::unordered_set<std::string> whitelist_domains;     ///< trusted registered domains
    std::vector<std::string> cdn_suffixes;
    std::vector<std::string> overloaded_dns_suffixes;      ///< DNSBL-style zones
    std::vector<std::string> local_domain_suffixes;
    int min_longest_label = 6;
    int min_hostnames_per_domain = 3;
    std::set<QueryType> allowed_qtypes = {QueryType::TXT, QueryType::CNAME, QueryType::MX,
                                          QueryType::SRV, QueryType::Null, QueryType::Key,
                                          QueryType::A,   QueryType::AAAA};

    void add_whitelist(std::string_view domain) { whitelist_domains.insert(to_lower(domain)); }
    void add_cdn(std::string_view suffix) { cdn_suffixes.push_back(to_lower(suffix)); }
    void add_overloaded(std::string_view suffix) {
        overloaded_dns_suffixes.push_back(to_lower(suffix));
    }
    void add_local(std::string_view suffix) { local_domain_suffixes.push_back(to_lower(suffix)); }
};

/// Names reported in drop attributions, in evaluation order.
namespace filter_names {
inline constexpr std::string_view qtype = "qtype";
inline constexpr std::string_view rcode = "rcode";
inline constexpr std::string_view whitelist = "whitelist";
inline constexpr std::string_view cdn = "cdn";
inline constexpr std::string_view overloaded_dns = "overloaded_dns";
inline constexpr std::string_view local_domain = "local_domain";
inline constexpr std::string_view ip_in_subdomain = "ip_in_subdomain";
inline constexpr std::string_view short_label = "short_label";
inline constexpr std::string_view duplicate = "duplicate";
inline constexpr std::string_view few_hostnames = "few_hostnames";
inline constexpr std::string_view passed = "passed";
}  // namespace filter_names

/// Outcome of the per-record filters: either the record survives or the
/// name of the first matching filter.
struct FilterDecision {
    bool keep = true;
    std::string_view dropped_by = filter_names::passed;

    static FilterDecision kept() { return {}; }
    static FilterDecision drop(std::string_view name) { return {false, name}; }
};

/// Per-record attribution of what happened to each input of a batch.
struct FilterTrace {
    std::vector<std::string_view> dropped_by;  ///< indexed by record position; "passed" if kept
    std::map<std::string_view, std::uint64_t> drop_counts;

    std::uint64_t total() const { return dropped_by.size(); }
    std::uint64_t passed() const {
        std::uint64_t n = 0;
        for (auto d : dropped_by)
            if (d == filter_names::passed) ++n;
        return n;
    }
};

namespace detail {

/// True when the lowercased qname ends with the suffix on a label boundary.
inline bool ends_with_suffix(std::string_view qname_lower, std::string_view suffix_lower) {
    if (suffix_lower.empty() || qname_lower.size() < suffix_lower.size()) return false;
    if (qname_lower.size() == suffix_lower.size()) return qname_lower == suffix_lower;
    const std::size_t off = qname_lower.size() - suffix_lower.size();
    return qname_lower[off - 1] == '.' && qname_lower.substr(off) == suffix_lower;
}

inline bool matches_any_suffix(std::string_view qname_lower,
                               const std::vector<std::string>& suffixes) {
    for (const auto& s : suffixes)
        if (ends_with_suffix(qname_lower, s)) return true;
    return false;
}

inline bool is_decimal_octet(std::string_view label) {
    if (label.empty() || label.size() > 3) return false;
    int v = 0;
    for (char c : label) {
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    return v <= 255;
}

/// Four consecutive subdomain labels that each hold a decimal octet form a
/// dotted quad regardless of direction, which covers both forward and
/// reversed PTR-style names.
inline bool has_ip_in_subdomain(const ParsedHostname& parsed) {
    const auto& labels = parsed.subdomain_labels;
    if (labels.size() < 4) return false;
    std::size_t run = 0;
    for (const auto& label : labels) {
        run = is_decimal_octet(label) ? run + 1 : 0;
        if (run >= 4) return true;
    }
    return false;
}

}  // namespace detail

/// Applies the per-record filters in a fixed order; the first match wins
/// and names the filter. Total function, no record is mutated.
inline FilterDecision apply_record_filters(const DnsQueryRecord& record,
                                           const ParsedHostname& parsed,
                                           const FilterConfig& cfg) {
    using namespace filter_names;
    if (!cfg.allowed_qtypes.count(record.qtype.type) || record.qtype.type == QueryType::Other)
        return FilterDecision::drop(qtype);
    if (record.rcode != 0) return FilterDecision::drop(rcode);

    const std::string reg_lower = to_lower(parsed.registered_domain);
    if (cfg.whitelist_domains.count(reg_lower)) return FilterDecision::drop(whitelist);

    const std::string qname_lower = to_lower(record.qname);
    if (detail::matches_any_suffix(qname_lower, cfg.cdn_suffixes))
        return FilterDecision::drop(cdn);
    if (detail::matches_any_suffix(qname_lower, cfg.overloaded_dns_suffixes))
        return FilterDecision::drop(overloaded_dns);
    if (detail::matches_any_suffix(qname_lower, cfg.local_domain_suffixes))
        return FilterDecision::drop(local_domain);
    if (detail::has_ip_in_subdomain(parsed)) return FilterDecision::drop(ip_in_subdomain);
    if (parsed.longest_subdomain_label.size() < static_cast<std::size_t>(cfg.min_longest_label))
        return FilterDecision::drop(short_label);
    return FilterDecision::kept();
}

/// A record together with its parse, as carried through the chain.
struct FilteredRecord {
    DnsQueryRecord record;
    ParsedHostname parsed;
};

struct GroupFilterResult {
    std::vector<FilteredRecord> survivors;  ///< input timestamp order preserved
    FilterTrace trace;
};

/// Window-scoped group filters: exact (source, qname, qtype) duplicates keep
/// only the earliest occurrence, then registered domains with fewer than
/// min_hostnames_per_domain distinct hostnames are dropped whole.
inline GroupFilterResult apply_group_filters(const std::vector<FilteredRecord>& batch,
                                             const FilterConfig& cfg) {
    using namespace filter_names;
    GroupFilterResult out;
    out.trace.dropped_by.assign(batch.size(), passed);

    std::unordered_set<std::string> seen;
    std::unordered_map<std::string, std::unordered_set<std::string>> hostnames_per_domain;
    std::vector<std::size_t> dedup_idx;
    seen.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& fr = batch[i];
        std::string key = fr.record.source;
        key += '|';
        key += to_lower(fr.record.qname);
        key += '|';
        key += to_string(fr.record.qtype.type);
        if (!seen.insert(std::move(key)).second) {
            out.trace.dropped_by[i] = duplicate;
            ++out.trace.drop_counts[duplicate];
            continue;
        }
        dedup_idx.push_back(i);
        hostnames_per_domain[to_lower(fr.parsed.registered_domain)].insert(
            to_lower(fr.record.qname));
    }

    for (std::size_t i : dedup_idx) {
        const auto& fr = batch[i];
        const auto& names = hostnames_per_domain[to_lower(fr.parsed.registered_domain)];
        if (names.size() < static_cast<std::size_t>(cfg.min_hostnames_per_domain)) {
            out.trace.dropped_by[i] = few_hostnames;
            ++out.trace.drop_counts[few_hostnames];
        } else {
            out.survivors.push_back(fr);
        }
    }
    return out;
}

/// Record filters and group filters combined over one batch; the trace
/// covers every input record exactly once.
inline GroupFilterResult apply_filter_chain(const std::vector<FilteredRecord>& batch,
                                            const FilterConfig& cfg) {
    GroupFilterResult out;
    out.trace.dropped_by.assign(batch.size(), filter_names::passed);

    std::vector<FilteredRecord> record_pass;
    std::vector<std::size_t> record_pass_idx;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const FilterDecision d = apply_record_filters(batch[i].record, batch[i].parsed, cfg);
        if (d.keep) {
            record_pass.push_back(batch[i]);
            record_pass_idx.push_back(i);
        } else {
            out.trace.dropped_by[i] = d.dropped_by;
            ++out.trace.drop_counts[d.dropped_by];
        }
    }

    GroupFilterResult grouped = apply_group_filters(record_pass, cfg);
    for (std::size_t j = 0; j < record_pass.size(); ++j) {
        if (grouped.trace.dropped_by[j] != filter_names::passed) {
            out.trace.dropped_by[record_pass_idx[j]] = grouped.trace.dropped_by[j];
            ++out.trace.drop_counts[grouped.trace.dropped_by[j]];
        }
    }
    out.survivors = std::move(grouped.survivors);
    return out;
}

inline FilterConfig load_filter_lists(FilterConfig cfg, const std::string& whitelist_path,
                                      const std::string& cdn_path,
                                      const std::string& overloaded_path,
                                      const std::string& local_path) {
    auto load_into = [](const std::string& path, auto&& add) {
        if (path.empty()) return;
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open list file: " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto b = line.find_first_not_of(" \t");
            auto e = line.find_last_not_of(" \t");
            if (b == std::string::npos) continue;
            add(line.substr(b, e - b + 1));
        }
    };
    load_into(whitelist_path, [&](const std::string& s) { cfg.add_whitelist(s); });
    load_into(cdn_path, [&](const std::string& s) { cfg.add_cdn(s); });
    load_into(overloaded_path, [&](const std::string& s) { cfg.add_overloaded(s); });
    load_into(local_path, [&](const std::string& s) { cfg.add_local(s); });
    return cfg;
}

}  // namespace dnscov
