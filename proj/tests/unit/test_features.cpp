#include <catch2/catch_amalgamated.hpp>

#include "dnscov/features.hpp"
#include "dnscov/suffix_list.hpp"
#include "support/oracles.hpp"

using namespace dnscov;
using Catch::Matchers::WithinAbs;

namespace {
const SuffixList kSuffixes({"com", "net", "org"});
}

TEST_CASE("direct counting on a mixed-case subdomain", "[features]") {
    const auto fv = extract_features(split_hostname("AbC1.example.com", kSuffixes));
    CHECK_THAT(fv.uppercase_ratio, WithinAbs(0.5, 1e-15));
    CHECK_THAT(fv.digits_ratio, WithinAbs(0.25, 1e-15));
    CHECK_THAT(fv.total_label_ratio, WithinAbs(16.0 / 253.0, 1e-15));
    CHECK_THAT(fv.per_label_ratio, WithinAbs(4.0 / 63.0, 1e-15));
}

TEST_CASE("rfc maxima reach exactly 1.0", "[features]") {
    // 253 chars total with one 63-char subdomain label
    const std::string l63(63, 'a');
    const std::string l60(60, 'b');
    std::string qname = l63 + "." + l63 + "." + l60 + "." + l60 + ".com";
    REQUIRE(qname.size() == 253);
    const auto parsed = split_hostname(qname, kSuffixes);
    const auto fv = extract_features(parsed);
    CHECK(fv.total_label_ratio == 1.0);
    CHECK(fv.per_label_ratio == 1.0);
}

TEST_CASE("dots excluded; hyphens and non-ascii count denominator only", "[features]") {
    const auto fv = extract_features(split_hostname("ab-CD.e1\xC3\xA9.example.com", kSuffixes));
    // subdomain chars: a b - C D e 1 0xC3 0xA9  -> 9 chars, 2 upper, 1 digit
    CHECK_THAT(fv.uppercase_ratio, WithinAbs(2.0 / 9.0, 1e-15));
    CHECK_THAT(fv.digits_ratio, WithinAbs(1.0 / 9.0, 1e-15));
}

TEST_CASE("empty subdomain is an error", "[features]") {
    CHECK_THROWS_AS(extract_features(split_hostname("example.com", kSuffixes)), EmptySubdomain);
}

TEST_CASE("character-class ratios match the counting oracle", "[features]") {
    const std::vector<std::string> subdomains = {
        "aGVsbG8gd29ybGQxMjM0", "NOUPPER", "nolower123", "0123456789", "m1X3d-C4s3",
        "word.second",          "a.b.c.d", "x",          "Zz9-",       "base64PAYLOADstring",
    };
    for (const auto& sub : subdomains) {
        CAPTURE(sub);
        const std::string qname = sub + ".t.evil.com";
        const auto parsed = split_hostname(qname, kSuffixes);
        const auto fv = extract_features(parsed);
        const auto counts = oracle::count_subdomain_chars(parsed.subdomain());
        REQUIRE(counts.total > 0);
        CHECK_THAT(fv.uppercase_ratio,
                   WithinAbs(static_cast<double>(counts.uppercase) / counts.total, 1e-12));
        CHECK_THAT(fv.digits_ratio,
                   WithinAbs(static_cast<double>(counts.digits) / counts.total, 1e-12));
        CHECK_THAT(fv.total_label_ratio, WithinAbs(qname.size() / 253.0, 1e-12));
        CHECK(fv.uppercase_ratio >= 0.0);
        CHECK(fv.uppercase_ratio <= 1.0);
        CHECK(fv.digits_ratio >= 0.0);
        CHECK(fv.digits_ratio <= 1.0);
        CHECK(fv.total_label_ratio <= 1.0);
        CHECK(fv.per_label_ratio <= 1.0);
    }
}
