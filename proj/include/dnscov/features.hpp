#pragma once

#include <array>
#include <cstddef>

#include "dnscov/errors.hpp"
#include "dnscov/hostname.hpp"

namespace dnscov {

/// The four lexical ratios extracted from a hostname, each in [0, 1].
struct FeatureVector {
    double uppercase_ratio = 0.0;    ///< uppercase letters / subdomain chars
    double digits_ratio = 0.0;       ///< digits / subdomain chars
    double total_label_ratio = 0.0;  ///< hostname length / 253
    double per_label_ratio = 0.0;    ///< longest subdomain label length / 63

    std::array<double, 4> as_array() const {
        return {uppercase_ratio, digits_ratio, total_label_ratio, per_label_ratio};
    }

    static FeatureVector from_array(const std::array<double, 4>& a) {
        return {a[0], a[1], a[2], a[3]};
    }

    bool operator==(const FeatureVector& rhs) const = default;
};

inline double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    const double d0 = a.uppercase_ratio - b.uppercase_ratio;
    const double d1 = a.digits_ratio - b.digits_ratio;
    const double d2 = a.total_label_ratio - b.total_label_ratio;
    const double d3 = a.per_label_ratio - b.per_label_ratio;
    return d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3;
}

/// Extracts the feature vector from a parsed hostname. Character ratios are
/// computed over the subdomain with the label separators excluded; only
/// ASCII A-Z count as uppercase and 0-9 as digits, so non-ASCII bytes add
/// to the denominator only. Case-sensitive by design. Throws EmptySubdomain
/// when there are no subdomain labels.
inline FeatureVector extract_features(const ParsedHostname& parsed) {
    if (!parsed.has_subdomain()) throw EmptySubdomain();

    std::size_t chars = 0, upper = 0, digits = 0;
    for (const auto& label : parsed.subdomain_labels) {
        chars += label.size();
        for (const char c : label) {
            if (c >= 'A' && c <= 'Z') ++upper;
            else if (c >= '0' && c <= '9') ++digits;
        }
    }

    FeatureVector fv;
    fv.uppercase_ratio = static_cast<double>(upper) / static_cast<double>(chars);
    fv.digits_ratio = static_cast<double>(digits) / static_cast<double>(chars);
    fv.total_label_ratio =
        static_cast<double>(parsed.total_len) / static_cast<double>(kMaxHostnameChars);
    fv.per_label_ratio = static_cast<double>(parsed.longest_subdomain_label.size()) /
                         static_cast<double>(kMaxLabelChars);
    return fv;
}

}  // namespace dnscov
