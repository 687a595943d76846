#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace dnscov {

constexpr double kJaroWinklerPrefixWeight = 0.1;
constexpr std::size_t kJaroWinklerMaxPrefix = 4;
constexpr double kJaroWinklerBoostThreshold = 0.7;

/// Jaro similarity between two symbol sequences, in [0, 1]. Two empty
/// sequences compare as 1, an empty against a non-empty as 0.
template <typename Sym>
double jaro_similarity(std::span<const Sym> a, std::span<const Sym> b) {
    const std::size_t la = a.size(), lb = b.size();
    if (la == 0 && lb == 0) return 1.0;
    if (la == 0 || lb == 0) return 0.0;

    const std::size_t max_len = std::max(la, lb);
    const std::size_t window = max_len / 2 == 0 ? 0 : max_len / 2 - 1;

    std::vector<char> a_matched(la, 0), b_matched(lb, 0);
    std::size_t matches = 0;
    for (std::size_t i = 0; i < la; ++i) {
        const std::size_t lo = i > window ? i - window : 0;
        const std::size_t hi = std::min(lb, i + window + 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (!b_matched[j] && a[i] == b[j]) {
                a_matched[i] = b_matched[j] = 1;
                ++matches;
                break;
            }
        }
    }
    if (matches == 0) return 0.0;

    // transpositions: matched symbols compared in sequence order
    std::size_t t2 = 0;  // twice the transposition count
    std::size_t j = 0;
    for (std::size_t i = 0; i < la; ++i) {
        if (!a_matched[i]) continue;
        while (!b_matched[j]) ++j;
        if (!(a[i] == b[j])) ++t2;
        ++j;
    }
    const double m = static_cast<double>(matches);
    const double t = static_cast<double>(t2 / 2);
    return (m / static_cast<double>(la) + m / static_cast<double>(lb) + (m - t) / m) / 3.0;
}

/// Jaro-Winkler similarity: the Jaro value boosted by the common prefix
/// (weight 0.1, at most 4 symbols) when the base similarity exceeds 0.7.
template <typename Sym>
double jaro_winkler_similarity(std::span<const Sym> a, std::span<const Sym> b) {
    double sim = jaro_similarity(a, b);
    if (sim > kJaroWinklerBoostThreshold) {
        std::size_t prefix = 0;
        const std::size_t limit = std::min({a.size(), b.size(), kJaroWinklerMaxPrefix});
        while (prefix < limit && a[prefix] == b[prefix]) ++prefix;
        sim += static_cast<double>(prefix) * kJaroWinklerPrefixWeight * (1.0 - sim);
    }
    return sim;
}

inline double jaro_winkler_similarity(std::string_view a, std::string_view b) {
    return jaro_winkler_similarity(std::span<const char>(a.data(), a.size()),
                                   std::span<const char>(b.data(), b.size()));
}

template <typename Sym>
double jaro_winkler_distance(std::span<const Sym> a, std::span<const Sym> b) {
    return 1.0 - jaro_winkler_similarity(a, b);
}

inline double jaro_winkler_distance(std::string_view a, std::string_view b) {
    return 1.0 - jaro_winkler_similarity(a, b);
}

}  // namespace dnscov
