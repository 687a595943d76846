#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "dnscov/analytics.hpp"
#include "dnscov/errors.hpp"
#include "dnscov/ocsvm.hpp"

namespace dnscov {

// Model container, version 1. Little-endian, densely packed:
//   magic   "DCVM" (4 bytes)
//   version u32
//   flags   u32 (bit 0: baseline section present)
//   gamma, nu, rho           f64 each
//   trained_at               i64 (epoch milliseconds)
//   training_size, sv_count  u64 each
//   sv_count x { alpha f64, features f64[4] }
//   if baseline present:
//     unique_requests_p90 f64, unique_hostnames_p90 f64,
//     built_from_len u32, built_from bytes
// The file ends exactly after the last section; trailing bytes or a short
// read mean corruption.

inline constexpr char kModelMagic[4] = {'D', 'C', 'V', 'M'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

class ByteWriter {
public:
    void raw(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    void u32(std::uint32_t v) {
        std::uint8_t b[4];
        for (int i = 0; i < 4; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        raw(b, 4);
    }
    void u64(std::uint64_t v) {
        std::uint8_t b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<std::uint8_t>(v >> (8 * i));
        raw(b, 8);
    }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        u64(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    explicit ByteReader(const std::vector<std::uint8_t>& buf) : buf_(buf) {}

    void raw(void* p, std::size_t n) {
        if (pos_ + n > buf_.size()) throw CorruptModel("unexpected end of file");
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() {
        std::uint8_t b[4];
        raw(b, 4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::uint64_t u64() {
        std::uint8_t b[8];
        raw(b, 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str() {
        const std::uint32_t len = u32();
        if (len > 1u << 20) throw CorruptModel("implausible string length");
        std::string s(len, '\0');
        raw(s.data(), len);
        return s;
    }
    bool exhausted() const { return pos_ == buf_.size(); }

private:
    const std::vector<std::uint8_t>& buf_;
    std::size_t pos_ = 0;
};

}  // namespace detail

/// Serializes a model, with an optional baseline section, into the
/// container format above. Round trips are lossless (doubles are stored as
/// raw IEEE bits).
inline std::vector<std::uint8_t> save_model(const OcsvmModel& model,
                                            const BaselineDistributions* baseline = nullptr) {
    detail::ByteWriter w;
    w.raw(kModelMagic, 4);
    w.u32(kModelVersion);
    w.u32(baseline && baseline->built ? 1u : 0u);
    w.f64(model.gamma);
    w.f64(model.nu);
    w.f64(model.rho);
    w.i64(model.trained_at);
    w.u64(model.training_size);
    w.u64(model.support_vectors.size());
    for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
        w.f64(model.alphas[i]);
        for (double v : model.support_vectors[i].as_array()) w.f64(v);
    }
    if (baseline && baseline->built) {
        w.f64(baseline->unique_requests_p90);
        w.f64(baseline->unique_hostnames_p90);
        w.str(baseline->built_from);
    }
    return w.take();
}

struct LoadedModel {
    OcsvmModel model;
    BaselineDistributions baseline;  ///< built == false when absent from the file
};

/// Parses the container. Throws VersionMismatch for unknown versions and
/// CorruptModel for bad magic, short reads or trailing bytes.
inline LoadedModel load_model(const std::vector<std::uint8_t>& bytes) {
    detail::ByteReader r(bytes);
    char magic[4];
    r.raw(magic, 4);
    if (std::memcmp(magic, kModelMagic, 4) != 0) throw CorruptModel("bad magic");
    const std::uint32_t version = r.u32();
    if (version != kModelVersion) throw VersionMismatch(version, kModelVersion);
    const std::uint32_t flags = r.u32();

    LoadedModel out;
    out.model.gamma = r.f64();
    out.model.nu = r.f64();
    out.model.rho = r.f64();
    out.model.trained_at = r.i64();
    out.model.training_size = r.u64();
    const std::uint64_t sv_count = r.u64();
    if (sv_count > (1ull << 32)) throw CorruptModel("implausible support vector count");
    out.model.alphas.reserve(sv_count);
    out.model.support_vectors.reserve(sv_count);
    for (std::uint64_t i = 0; i < sv_count; ++i) {
        const double alpha = r.f64();
        std::array<double, 4> comps;
        for (double& c : comps) c = r.f64();
        out.model.alphas.push_back(alpha);
        out.model.support_vectors.push_back(FeatureVector::from_array(comps));
    }
    if (flags & 1u) {
        out.baseline.built = true;
        out.baseline.unique_requests_p90 = r.f64();
        out.baseline.unique_hostnames_p90 = r.f64();
        out.baseline.built_from = r.str();
    }
    if (!r.exhausted()) throw CorruptModel("trailing bytes");
    return out;
}

inline void write_model_file(const std::string& path, const OcsvmModel& model,
                             const BaselineDistributions* baseline = nullptr) {
    const auto bytes = save_model(model, baseline);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open model file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("failed writing model file: " + path);
}

inline LoadedModel read_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open model file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return load_model(bytes);
}

}  // namespace dnscov
