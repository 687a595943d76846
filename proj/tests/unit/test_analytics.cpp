#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "dnscov/analytics.hpp"
#include "support/oracles.hpp"
#include "support/test_paths.hpp"

using namespace dnscov;
using Catch::Matchers::WithinAbs;

namespace {

const SuffixList kSuffixes({"com", "net", "org", "it"});

ParsedHostname parse(const std::string& qname) { return split_hostname(qname, kSuffixes); }

BaselineDistributions baseline(double p90_r, double p90_h) {
    BaselineDistributions b;
    b.built = true;
    b.unique_requests_p90 = p90_r;
    b.unique_hostnames_p90 = p90_h;
    b.built_from = "fixture";
    return b;
}

std::vector<LanguageProfile> load_profiles() {
    const AnalyticsConfig cfg;
    return {LanguageProfile::load_files("english", testsupport::data_path("profiles/english_mono.tsv"),
                                        testsupport::data_path("profiles/english_bi.tsv"),
                                        cfg.bigram_top_k),
            LanguageProfile::load_files("italian", testsupport::data_path("profiles/italian_mono.tsv"),
                                        testsupport::data_path("profiles/italian_bi.tsv"),
                                        cfg.bigram_top_k)};
}

}  // namespace

TEST_CASE("unique-request indicator counts tail sub-windows", "[analytics]") {
    const AnalyticsConfig cfg;
    SourceWindowStats stats;
    stats.source = "10.0.0.5";

    SECTION("all sub-windows below the percentile") {
        stats.per_domain_request_subcounts["evil.com"] = {1, 2, 0, 1, 2, 1, 0, 2, 1, 1};
        CHECK(indicator_unique_requests(stats, "evil.com", baseline(5.0, 5.0), cfg) == 0.0);
    }
    SECTION("all sub-windows above") {
        stats.per_domain_request_subcounts["evil.com"] = {9, 9, 8, 7, 9, 9, 8, 7, 9, 9};
        CHECK(indicator_unique_requests(stats, "evil.com", baseline(5.0, 5.0), cfg) == 1.0);
    }
    SECTION("seven of ten above gives 0.7") {
        // direct count against the fixture: 7 values exceed p90 = 5
        stats.per_domain_request_subcounts["evil.com"] = {6, 6, 6, 6, 6, 6, 6, 1, 2, 5};
        const double got = indicator_unique_requests(stats, "evil.com", baseline(5.0, 5.0), cfg);
        CHECK_THAT(got, WithinAbs(0.7, 1e-15));
    }
    SECTION("strictly-above semantics: equal to the percentile is not a tail event") {
        stats.per_domain_request_subcounts["evil.com"] = {5, 5, 5, 5, 5, 5, 5, 5, 5, 5};
        CHECK(indicator_unique_requests(stats, "evil.com", baseline(5.0, 5.0), cfg) == 0.0);
    }
    SECTION("unknown domain scores zero") {
        CHECK(indicator_unique_requests(stats, "other.com", baseline(5.0, 5.0), cfg) == 0.0);
    }
    SECTION("unbuilt baseline raises") {
        CHECK_THROWS_AS(indicator_unique_requests(stats, "evil.com", {}, cfg), EmptyBaseline);
    }
}

TEST_CASE("unique-hostname indicator mirrors the construction", "[analytics]") {
    const AnalyticsConfig cfg;
    DomainWindowStats stats;
    stats.domain = "evil.com";

    stats.hostname_subcounts = {0, 1, 0, 1, 1, 0, 1, 1, 0, 1};
    CHECK(indicator_unique_hostnames(stats, baseline(5.0, 3.0), cfg) == 0.0);
    stats.hostname_subcounts = {9, 9, 9, 9, 9, 9, 9, 9, 9, 9};
    CHECK(indicator_unique_hostnames(stats, baseline(5.0, 3.0), cfg) == 1.0);
    stats.hostname_subcounts = {4, 4, 4, 1, 1, 1, 1, 1, 1, 4};
    CHECK_THAT(indicator_unique_hostnames(stats, baseline(5.0, 3.0), cfg),
               WithinAbs(0.4, 1e-15));
    CHECK_THROWS_AS(indicator_unique_hostnames(stats, {}, cfg), EmptyBaseline);
}

TEST_CASE("entropy indicator normalizes by the alphabet capacity", "[analytics]") {
    const AnalyticsConfig cfg;

    CHECK(indicator_entropy(parse("aaaaaa.example.com"), cfg) == 0.0);

    // 64 distinct characters: entropy exactly 6 bits, indicator exactly 1
    std::string sub;
    for (int i = 0; i < 64; ++i) sub += static_cast<char>('\xA1' + i);
    ParsedHostname p;
    p.subdomain_labels = {sub};
    p.longest_subdomain_label = sub;
    p.labels = {sub, "example", "com"};
    p.total_len = sub.size() + 12;
    CHECK(indicator_entropy(p, cfg) == 1.0);

    // "abab": 1 bit over the histogram -> 1/6
    CHECK_THAT(indicator_entropy(parse("abab.example.com"), cfg), WithinAbs(1.0 / 6.0, 1e-12));
}

TEST_CASE("entropy maxes over subdomain and longest label, dots excluded", "[analytics]") {
    const AnalyticsConfig cfg;
    // joined subdomain "aaaabbbb" has 1 bit; label "aaaa" has 0; max is over both
    const double joined = indicator_entropy(parse("aaaa.bbbb.example.com"), cfg);
    CHECK_THAT(joined, WithinAbs(1.0 / 6.0, 1e-12));

    // histogram-only dependence: permuting characters changes nothing
    const double a = indicator_entropy(parse("abcabc.example.com"), cfg);
    const double b = indicator_entropy(parse("ccbbaa.example.com"), cfg);
    CHECK_THAT(a, WithinAbs(b, 1e-15));
}

TEST_CASE("entropy agrees with a sorted-run oracle on random strings", "[analytics]") {
    std::mt19937_64 gen(77);
    const std::string alphabet = "abcdefgh0123XYZ-";
    for (int trial = 0; trial < 300; ++trial) {
        std::string s;
        const std::size_t n = 1 + gen() % 40;
        for (std::size_t i = 0; i < n; ++i) s += alphabet[gen() % alphabet.size()];
        CAPTURE(s);
        CHECK_THAT(shannon_entropy(s), WithinAbs(oracle::entropy_reference(s), 1e-12));
    }
}

TEST_CASE("language profiles load, normalize and rank", "[analytics]") {
    const auto profiles = load_profiles();
    REQUIRE(profiles.size() == 2);
    const auto& english = profiles[0];
    CHECK(english.language == "english");

    double sum = 0.0;
    for (const auto& [sym, p] : english.monogram_freq) sum += p;
    CHECK_THAT(sum, WithinAbs(1.0, 1e-9));
    sum = 0.0;
    for (const auto& [sym, p] : english.bigram_freq) sum += p;
    CHECK_THAT(sum, WithinAbs(1.0, 1e-9));

    // rank string starts with the most frequent letters and has no duplicates
    CHECK(english.rank_string_mono.substr(0, 5) == "etaoi");
    std::set<char> seen(english.rank_string_mono.begin(), english.rank_string_mono.end());
    CHECK(seen.size() == english.rank_string_mono.size());

    CHECK(english.rank_string_bi.size() == 30);  // top-K truncation
    CHECK(english.rank_string_bi[0] == "th");
    CHECK(english.rank_string_bi[1] == "he");

    // malformed profile content is rejected
    std::stringstream bad("ab\t0.5\n");
    LanguageProfile p;
    CHECK_THROWS_AS(LanguageProfile::load_order(p, bad, 1, 30), ConfigError);
    std::stringstream dup("a\t0.5\na\t0.5\n");
    CHECK_THROWS_AS(LanguageProfile::load_order(p, dup, 1, 30), ConfigError);
    std::stringstream neg("a\t-0.5\n");
    CHECK_THROWS_AS(LanguageProfile::load_order(p, neg, 1, 30), ConfigError);
}

TEST_CASE("language distance behaves at its extremes", "[analytics]") {
    AnalyticsConfig cfg;
    const auto profiles = load_profiles();

    // no common symbols at all: distance 1 on every component
    ParsedHostname q;
    q.subdomain_labels = {"0123456789"};
    q.longest_subdomain_label = "0123456789";
    const double disjoint = indicator_language_distance(q, profiles, cfg);
    CHECK_THAT(disjoint, WithinAbs(1.0, 1e-12));

    // a dictionary word lands well below the encoded-payload regime
    ParsedHostname w;
    w.subdomain_labels = {"international"};
    w.longest_subdomain_label = "international";
    CHECK(indicator_language_distance(w, profiles, cfg) < disjoint);

    CHECK_THROWS_AS(indicator_language_distance(ParsedHostname{}, profiles, cfg),
                    EmptySubdomain);
}

TEST_CASE("language distance: identical rank strings give zero mono contribution",
          "[analytics]") {
    AnalyticsConfig cfg;
    auto profiles = load_profiles();

    // craft a profile whose rank string matches the subdomain's exactly
    LanguageProfile synthetic;
    synthetic.language = "english";
    const std::string word = "stable";  // ranks: ties resolved lexicographically
    std::map<char, std::uint32_t> freq;
    for (char c : word) ++freq[c];
    std::vector<std::pair<char, std::uint32_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](auto a, auto b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (auto [c, n] : ranked) {
        synthetic.rank_string_mono += c;
        synthetic.monogram_freq[c] = 1.0 / static_cast<double>(freq.size());
    }
    // bigrams of the word, ranked the same way
    std::map<std::string, std::uint32_t> bfreq;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) ++bfreq[word.substr(i, 2)];
    std::vector<std::pair<std::string, std::uint32_t>> branked(bfreq.begin(), bfreq.end());
    std::stable_sort(branked.begin(), branked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [s, n] : branked) {
        synthetic.rank_string_bi.push_back(s);
        synthetic.bigram_freq[s] = 1.0 / static_cast<double>(bfreq.size());
    }

    ParsedHostname p;
    p.subdomain_labels = {word};
    p.longest_subdomain_label = word;
    CHECK_THAT(indicator_language_distance(p, {synthetic}, cfg), WithinAbs(0.0, 1e-12));
}

TEST_CASE("bigram convention: strings shorter than two chars score distance 1", "[analytics]") {
    AnalyticsConfig cfg;
    const auto profiles = load_profiles();
    ParsedHostname p;
    p.subdomain_labels = {"e"};
    p.longest_subdomain_label = "e";
    // mono may be close, but both bigram contributions are exactly 1
    const double d = indicator_language_distance(p, profiles, cfg);
    CHECK(d >= 0.5);  // two of four components pinned at 1
}

TEST_CASE("anomaly index formula and clamps", "[analytics]") {
    const AnalyticsConfig cfg;

    SECTION("all ones with n_s == n_tot clamps to 1") {
        const auto idx = anomaly_index(1, 1, 1, 1, 50, 50, cfg);
        CHECK(idx.raw == 1.0);
        CHECK(idx.rescaled == 1.0);
    }
    SECTION("all zeros with n_s == n_tot lands exactly on b") {
        const auto idx = anomaly_index(0, 0, 0, 0, 10, 10, cfg);
        CHECK(idx.raw == 0.0);
        CHECK_THAT(idx.rescaled, WithinAbs(0.33, 1e-15));
        CHECK(verdict_for(idx.rescaled, cfg) == Verdict::Suspicious);  // 0.33 > 0.25
    }
    SECTION("paper-style arithmetic: raw 0.5 at ratio 1e-3") {
        const auto idx = anomaly_index(0.5, 0.5, 0.5, 0.5, 1, 1000, cfg);
        CHECK_THAT(idx.rescaled, WithinAbs(0.629, 1e-9));
    }
    SECTION("invalid counts") {
        CHECK_THROWS_AS(anomaly_index(0, 0, 0, 0, 0, 10, cfg), InvalidCounts);
        CHECK_THROWS_AS(anomaly_index(0, 0, 0, 0, 11, 10, cfg), InvalidCounts);
    }
    SECTION("floor at zero for tiny ratios") {
        AnalyticsConfig tiny = cfg;
        const auto idx = anomaly_index(0, 0, 0, 0, 1, 1000000000, tiny);
        CHECK(idx.rescaled == 0.0);
    }
}

TEST_CASE("anomaly index matches the long-double oracle on random tuples", "[analytics]") {
    const AnalyticsConfig cfg;
    std::mt19937_64 gen(123);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
        const double ir = u(gen), ih = u(gen), ie = u(gen), id = u(gen);
        const std::uint64_t ntot = 1 + gen() % 100000;
        const std::uint64_t ns = 1 + gen() % ntot;
        const auto idx = anomaly_index(ir, ih, ie, id, ns, ntot, cfg);
        const auto [raw_ref, rescaled_ref] =
            oracle::anomaly_index_reference(ir, ih, ie, id, ns, ntot, cfg.b, cfg.c);
        REQUIRE_THAT(idx.raw, WithinAbs(raw_ref, 1e-12));
        REQUIRE_THAT(idx.rescaled, WithinAbs(rescaled_ref, 1e-12));
        REQUIRE(idx.raw >= 0.0);
        REQUIRE(idx.raw <= 1.0);
        REQUIRE(idx.rescaled >= 0.0);
        REQUIRE(idx.rescaled <= 1.0);
    }
}

TEST_CASE("raw index is permutation-invariant; rescaled is monotone in n_s", "[analytics]") {
    const AnalyticsConfig cfg;
    const auto a = anomaly_index(0.1, 0.4, 0.7, 0.9, 5, 100, cfg);
    const auto b = anomaly_index(0.9, 0.7, 0.4, 0.1, 5, 100, cfg);
    CHECK(a.raw == b.raw);
    CHECK(a.rescaled == b.rescaled);

    double prev = 0.0;
    for (const std::uint64_t ns : {1ull, 2ull, 10ull, 50ull, 100ull}) {
        const auto idx = anomaly_index(0.3, 0.3, 0.3, 0.3, ns, 100, cfg);
        CHECK(idx.rescaled >= prev);
        prev = idx.rescaled;
    }
}

TEST_CASE("verdict boundary is strict", "[analytics]") {
    AnalyticsConfig cfg;
    CHECK(verdict_for(0.25, cfg) == Verdict::Cleared);  // exactly at the threshold
    CHECK(verdict_for(0.26, cfg) == Verdict::Suspicious);
    CHECK(verdict_for(0.2500000001, cfg) == Verdict::Suspicious);

    // an exactly-representable boundary through the full index computation:
    // raw 0, n_s == n_tot gives rescaled == b; with the threshold set to b
    // the verdict must be cleared
    cfg.a_threshold = 0.33;
    const auto idx = anomaly_index(0, 0, 0, 0, 7, 7, cfg);
    CHECK(idx.rescaled == 0.33);
    CHECK(verdict_for(idx.rescaled, cfg) == Verdict::Cleared);
}

TEST_CASE("classify_query assembles a full report", "[analytics]") {
    const AnalyticsConfig cfg;
    const auto profiles = load_profiles();

    DnsQueryRecord rec;
    rec.timestamp = 1672531200000;
    rec.source = "10.0.0.9";
    rec.qname = "aGVsbG8gd29ybGQxMjM0dGhp.c2lzYXRlc3Q.evil.com";
    rec.qtype = {QueryType::TXT, 0};
    rec.rcode = 0;
    const auto parsed = parse(rec.qname);

    SourceWindowStats stats;
    stats.source = rec.source;
    stats.n_tot = 100;
    stats.n_s = 40;
    stats.per_domain_request_subcounts["evil.com"] = {9, 9, 9, 9, 9, 9, 9, 9, 9, 9};
    DomainWindowStats dstats;
    dstats.domain = "evil.com";
    dstats.hostname_subcounts = {9, 9, 9, 9, 9, 9, 9, 9, 9, 9};

    const auto report = classify_query(42, rec, parsed, stats, dstats, baseline(3.0, 3.0),
                                       profiles, cfg);
    CHECK(report.record_id == 42);
    CHECK(report.domain == "evil.com");
    CHECK(report.qname == rec.qname);
    CHECK(report.i_r == 1.0);
    CHECK(report.i_h == 1.0);
    CHECK(report.i_e > 0.5);
    CHECK(report.raw_a == (report.i_r + report.i_h + report.i_e + report.i_d) / 4.0);
    CHECK(report.verdict == Verdict::Suspicious);

    // json round trip keeps the fields
    const auto j = to_json(report);
    const auto back = report_from_json(j);
    CHECK(back.record_id == report.record_id);
    CHECK(back.qname == report.qname);
    CHECK(back.rescaled_a == report.rescaled_a);
    CHECK(back.verdict == report.verdict);
}
