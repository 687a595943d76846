#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "dnscov/codecs.hpp"

using namespace dnscov;

namespace {
const std::vector<Codec> kAllCodecs = {Codec::Base32, Codec::Base64,    Codec::Base64Url,
                                       Codec::Base128, Codec::Hex,      Codec::CustomRc4};
}

TEST_CASE("empty payload encodes to no labels", "[codecs]") {
    for (const Codec c : kAllCodecs) {
        CHECK(encode_payload({}, c).empty());
        CHECK(decode_payload({}, c).empty());
    }
}

TEST_CASE("hex encoding of ascii is the expected nibble string", "[codecs]") {
    const Bytes hello = {'h', 'e', 'l', 'l', 'o'};
    const auto labels = encode_payload(hello, Codec::Hex, 4);
    REQUIRE(labels.size() == 3);
    CHECK(labels[0] == "6865");
    CHECK(labels[1] == "6c6c");
    CHECK(labels[2] == "6f");
    CHECK(decode_payload(labels, Codec::Hex) == hello);
}

TEST_CASE("labels respect the requested length", "[codecs]") {
    Bytes payload(100, 0xAB);
    for (const Codec c : kAllCodecs) {
        for (const std::size_t len : {1ul, 7ul, 63ul}) {
            const auto labels = encode_payload(payload, c, len);
            REQUIRE(!labels.empty());
            for (std::size_t i = 0; i + 1 < labels.size(); ++i) CHECK(labels[i].size() == len);
            CHECK(labels.back().size() <= len);
            CHECK(labels.back().size() >= 1);
        }
    }
}

TEST_CASE("random payloads round trip through every codec", "[codecs]") {
    std::mt19937_64 gen(4242);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + gen() % 1024;
        Bytes payload(n);
        for (auto& b : payload) b = static_cast<std::uint8_t>(gen());
        const std::size_t label_len = 1 + gen() % 63;
        for (const Codec c : kAllCodecs) {
            CAPTURE(trial, n, label_len, to_string(c));
            const auto labels = encode_payload(payload, c, label_len);
            REQUIRE(decode_payload(labels, c) == payload);
        }
    }
    // and a fixed 1 KiB payload
    Bytes kib(1024);
    for (auto& b : kib) b = static_cast<std::uint8_t>(gen());
    for (const Codec c : kAllCodecs) REQUIRE(decode_payload(encode_payload(kib, c), c) == kib);
}

TEST_CASE("alphabets stay inside their contract", "[codecs]") {
    Bytes payload(256);
    for (int i = 0; i < 256; ++i) payload[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);

    auto joined = [](const std::vector<std::string>& labels) {
        std::string s;
        for (const auto& l : labels) s += l;
        return s;
    };

    for (const char ch : joined(encode_payload(payload, Codec::Hex)))
        CHECK((std::isdigit(static_cast<unsigned char>(ch)) || (ch >= 'a' && ch <= 'f')));
    for (const char ch : joined(encode_payload(payload, Codec::Base32)))
        CHECK(((ch >= 'a' && ch <= 'z') || (ch >= '2' && ch <= '7')));
    for (const char ch : joined(encode_payload(payload, Codec::Base64Url)))
        CHECK((std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_'));
    for (const char ch : joined(encode_payload(payload, Codec::Base128))) {
        const auto uc = static_cast<unsigned char>(ch);
        CHECK(uc != '.');
        CHECK(uc != ',');
        CHECK(uc != '\n');
    }
}

TEST_CASE("rc4 is an involution and key-sensitive", "[codecs]") {
    Bytes data = {1, 2, 3, 250, 251, 252, 0, 0, 7};
    const Bytes once = rc4_apply(data, "key-one");
    CHECK(rc4_apply(once, "key-one") == data);
    CHECK(rc4_apply(once, "key-two") != data);

    // custom_rc4 round trip uses the key on both sides
    const auto labels = encode_payload(data, Codec::CustomRc4, 8, "key-one");
    CHECK(decode_payload(labels, Codec::CustomRc4, "key-one") == data);
    CHECK(decode_payload(labels, Codec::CustomRc4, "key-two") != data);
}

TEST_CASE("decoding rejects symbols outside the alphabet", "[codecs]") {
    CHECK_THROWS_AS(decode_payload({"zz!!"}, Codec::Hex), Error);
    CHECK_THROWS_AS(decode_payload({"ABC"}, Codec::Base32), Error);  // uppercase not in alphabet
}

TEST_CASE("codec names parse and print consistently", "[codecs]") {
    for (const Codec c : kAllCodecs) {
        const auto back = codec_from_string(to_string(c));
        REQUIRE(back.has_value());
        CHECK(*back == c);
    }
    CHECK_FALSE(codec_from_string("base1024").has_value());
}
