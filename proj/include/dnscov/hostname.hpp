#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "dnscov/errors.hpp"
#include "dnscov/suffix_list.hpp"

namespace dnscov {

constexpr std::size_t kMaxHostnameChars = 253;
constexpr std::size_t kMaxLabelChars = 63;

/// A hostname decomposed into labels, registered domain (public suffix plus
/// one label) and the subdomain to its left. Case is preserved throughout;
/// consumers that need case-insensitive grouping lowercase the registered
/// domain themselves.
struct ParsedHostname {
    std::vector<std::string> labels;            ///< left to right, original case
    std::string registered_domain;              ///< suffix match plus one label
    std::vector<std::string> subdomain_labels;  ///< labels left of registered_domain
    std::size_t total_len = 0;                  ///< full hostname length, no trailing dot
    std::string longest_subdomain_label;        ///< empty when there is no subdomain

    bool has_subdomain() const { return !subdomain_labels.empty(); }

    /// Subdomain characters joined with '.', as they appear in the qname.
    std::string subdomain() const {
        std::string out;
        for (std::size_t i = 0; i < subdomain_labels.size(); ++i) {
            if (i) out += '.';
            out += subdomain_labels[i];
        }
        return out;
    }
};

namespace detail {

inline std::vector<std::string> split_labels(std::string_view qname) {
    std::vector<std::string> labels;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= qname.size(); ++i) {
        if (i == qname.size() || qname[i] == '.') {
            labels.emplace_back(qname.substr(start, i - start));
            start = i + 1;
        }
    }
    return labels;
}

}  // namespace detail

/// Splits a hostname against the suffix list. The registered domain is the
/// longest matching public suffix plus the label immediately left of it;
/// with no match the last two labels are used. Throws InvalidHostname when
/// any label is empty or longer than 63 chars, or the name exceeds 253.
inline ParsedHostname split_hostname(std::string_view qname, const SuffixList& suffix_list) {
    if (qname.empty()) throw InvalidHostname("empty hostname");
    if (qname.size() > kMaxHostnameChars)
        throw InvalidHostname("hostname exceeds " + std::to_string(kMaxHostnameChars) +
                              " chars: " + std::to_string(qname.size()));

    ParsedHostname out;
    out.labels = detail::split_labels(qname);
    out.total_len = qname.size();
    for (const auto& label : out.labels) {
        if (label.empty()) throw InvalidHostname("empty label in '" + std::string(qname) + "'");
        if (label.size() > kMaxLabelChars)
            throw InvalidHostname("label exceeds " + std::to_string(kMaxLabelChars) +
                                  " chars in '" + std::string(qname) + "'");
    }

    const std::size_t n = out.labels.size();
    const std::string lower = to_lower(qname);
    const auto lower_labels = detail::split_labels(lower);

    // Longest suffix match never swallows the whole name; at least one label
    // must remain for the registered part unless the name IS a suffix.
    std::size_t suffix_labels = 0;
    const std::size_t probe_max = std::min(n, suffix_list.max_labels());
    for (std::size_t k = probe_max; k >= 1; --k) {
        std::string candidate;
        for (std::size_t i = n - k; i < n; ++i) {
            if (!candidate.empty()) candidate += '.';
            candidate += lower_labels[i];
        }
        if (suffix_list.contains(candidate)) {
            suffix_labels = k;
            break;
        }
        if (k == 1) break;
    }

    std::size_t reg_labels;
    if (suffix_labels == 0) {
        reg_labels = std::min<std::size_t>(n, 2);  // fallback: last two labels
    } else if (suffix_labels == n) {
        reg_labels = n;  // the name is itself a public suffix
    } else {
        reg_labels = suffix_labels + 1;
    }

    std::string reg;
    for (std::size_t i = n - reg_labels; i < n; ++i) {
        if (!reg.empty()) reg += '.';
        reg += out.labels[i];
    }
    out.registered_domain = reg;
    out.subdomain_labels.assign(out.labels.begin(), out.labels.begin() + (n - reg_labels));

    for (const auto& label : out.subdomain_labels) {
        if (label.size() > out.longest_subdomain_label.size()) out.longest_subdomain_label = label;
    }
    return out;
}

}  // namespace dnscov
