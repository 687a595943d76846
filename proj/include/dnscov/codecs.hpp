#pragma once

#include <array>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dnscov/errors.hpp"

namespace dnscov {

/// Payload-to-label codecs seen in DNS covert channels. CustomRc4 applies a
/// keyed RC4 stream before hex encoding; the others are plain bit packers.
enum class Codec { Base32, Base64, Base64Url, Base128, Hex, CustomRc4 };

inline std::optional<Codec> codec_from_string(std::string_view s) {
    if (s == "base32") return Codec::Base32;
    if (s == "base64") return Codec::Base64;
    if (s == "base64url") return Codec::Base64Url;
    if (s == "base128") return Codec::Base128;
    if (s == "hex") return Codec::Hex;
    if (s == "custom_rc4") return Codec::CustomRc4;
    return std::nullopt;
}

inline std::string_view to_string(Codec c) {
    switch (c) {
        case Codec::Base32: return "base32";
        case Codec::Base64: return "base64";
        case Codec::Base64Url: return "base64url";
        case Codec::Base128: return "base128";
        case Codec::Hex: return "hex";
        case Codec::CustomRc4: return "custom_rc4";
    }
    return "?";
}

using Bytes = std::vector<std::uint8_t>;

namespace detail {

struct Alphabet {
    std::array<char, 128> chars{};
    std::array<std::int16_t, 256> reverse{};
    int bits = 0;

    Alphabet(std::string_view symbols, int bits_) : bits(bits_) {
        reverse.fill(-1);
        for (std::size_t i = 0; i < symbols.size(); ++i) {
            chars[i] = symbols[i];
            reverse[static_cast<unsigned char>(symbols[i])] = static_cast<std::int16_t>(i);
        }
    }
};

inline const Alphabet& hex_alphabet() {
    static const Alphabet a("0123456789abcdef", 4);
    return a;
}

inline const Alphabet& base32_alphabet() {
    static const Alphabet a("abcdefghijklmnopqrstuvwxyz234567", 5);
    return a;
}

inline const Alphabet& base64_alphabet() {
    static const Alphabet a(
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/", 6);
    return a;
}

inline const Alphabet& base64url_alphabet() {
    static const Alphabet a(
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_", 6);
    return a;
}

/// 7-bit alphabet: letters, digits, hyphen, then high bytes 0xA1..0xE1.
/// High bytes keep labels clear of the CSV and label separators.
inline const Alphabet& base128_alphabet() {
    static const Alphabet a = [] {
        std::string s = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789-";
        for (int b = 0xA1; s.size() < 128; ++b) s.push_back(static_cast<char>(b));
        return Alphabet(s, 7);
    }();
    return a;
}

// MSB-first bit packing, zero-padded tail; decoding drops the incomplete
// trailing group, which makes encode/decode an exact round trip.
inline std::string pack_bits(const Bytes& data, const Alphabet& alpha) {
    std::string out;
    out.reserve((data.size() * 8 + alpha.bits - 1) / alpha.bits);
    std::uint32_t acc = 0;
    int nbits = 0;
    for (std::uint8_t byte : data) {
        acc = (acc << 8) | byte;
        nbits += 8;
        while (nbits >= alpha.bits) {
            nbits -= alpha.bits;
            out.push_back(alpha.chars[(acc >> nbits) & ((1u << alpha.bits) - 1)]);
        }
    }
    if (nbits > 0) out.push_back(alpha.chars[(acc << (alpha.bits - nbits)) & ((1u << alpha.bits) - 1)]);
    return out;
}

inline Bytes unpack_bits(std::string_view text, const Alphabet& alpha) {
    Bytes out;
    out.reserve(text.size() * alpha.bits / 8);
    std::uint32_t acc = 0;
    int nbits = 0;
    for (char c : text) {
        const std::int16_t v = alpha.reverse[static_cast<unsigned char>(c)];
        if (v < 0) throw Error(std::string("symbol outside codec alphabet: '") + c + "'");
        acc = (acc << alpha.bits) | static_cast<std::uint32_t>(v);
        nbits += alpha.bits;
        if (nbits >= 8) {
            nbits -= 8;
            out.push_back(static_cast<std::uint8_t>((acc >> nbits) & 0xff));
        }
    }
    return out;
}

inline const Alphabet& alphabet_for(Codec codec) {
    switch (codec) {
        case Codec::Hex:
        case Codec::CustomRc4: return hex_alphabet();
        case Codec::Base32: return base32_alphabet();
        case Codec::Base64: return base64_alphabet();
        case Codec::Base64Url: return base64url_alphabet();
        case Codec::Base128: return base128_alphabet();
    }
    throw UnsupportedCodec("unknown");
}

}  // namespace detail

/// RC4 keystream XOR (encryption and decryption are the same operation).
/// Used only to shape synthetic traffic; the key is a test fixture, not a
/// security boundary.
inline Bytes rc4_apply(const Bytes& data, std::string_view key) {
    std::array<std::uint8_t, 256> s;
    std::iota(s.begin(), s.end(), 0);
    std::uint8_t j = 0;
    for (int i = 0; i < 256; ++i) {
        j = static_cast<std::uint8_t>(j + s[i] + key[i % key.size()]);
        std::swap(s[i], s[j]);
    }
    Bytes out(data.size());
    std::uint8_t a = 0, b = 0;
    for (std::size_t n = 0; n < data.size(); ++n) {
        a = static_cast<std::uint8_t>(a + 1);
        b = static_cast<std::uint8_t>(b + s[a]);
        std::swap(s[a], s[b]);
        out[n] = data[n] ^ s[static_cast<std::uint8_t>(s[a] + s[b])];
    }
    return out;
}

inline constexpr std::string_view kDefaultRc4Key = "dnscov-fixture-key";

/// Encodes payload bytes into DNS labels of at most label_len characters.
/// Concatenating the labels and decoding reproduces the input exactly.
inline std::vector<std::string> encode_payload(const Bytes& payload, Codec codec,
                                               std::size_t label_len = 63,
                                               std::string_view rc4_key = kDefaultRc4Key) {
    if (label_len == 0) throw Error("label_len must be positive");
    const Bytes* data = &payload;
    Bytes scrambled;
    if (codec == Codec::CustomRc4) {
        scrambled = rc4_apply(payload, rc4_key);
        data = &scrambled;
    }
    const std::string text = detail::pack_bits(*data, detail::alphabet_for(codec));
    std::vector<std::string> labels;
    for (std::size_t pos = 0; pos < text.size(); pos += label_len)
        labels.push_back(text.substr(pos, std::min(label_len, text.size() - pos)));
    return labels;
}

/// Inverse of encode_payload.
inline Bytes decode_payload(const std::vector<std::string>& labels, Codec codec,
                            std::string_view rc4_key = kDefaultRc4Key) {
    std::string text;
    for (const auto& l : labels) text += l;
    Bytes data = detail::unpack_bits(text, detail::alphabet_for(codec));
    if (codec == Codec::CustomRc4) data = rc4_apply(data, rc4_key);
    return data;
}

}  // namespace dnscov
