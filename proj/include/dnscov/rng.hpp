#pragma once

#include <cstdint>
#include <random>

namespace dnscov {

/// Deterministic random source. Wraps mt19937_64 with hand-rolled draw
/// helpers so that identical seeds give identical streams on every
/// platform (the std distributions make no such promise).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n) {
        // modulo bias is irrelevant at these ranges
        return gen_() % n;
    }

    /// Uniform integer in [lo, hi] inclusive.
    std::int64_t between(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    /// Uniform double in [0, 1).
    double unit() {
        return static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
    }

    bool chance(double p) { return unit() < p; }

    void fill_bytes(std::uint8_t* out, std::size_t n) {
        std::size_t i = 0;
        while (i < n) {
            std::uint64_t v = gen_();
            for (int b = 0; b < 8 && i < n; ++b, ++i) {
                out[i] = static_cast<std::uint8_t>(v & 0xff);
                v >>= 8;
            }
        }
    }

    /// Derives an independent child stream; stable given (seed, salt).
    Rng fork(std::uint64_t salt) const {
        std::uint64_t x = seed_ ^ (salt + 0x9e3779b97f4a7c15ULL);
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return Rng(x ^ (x >> 31));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

}  // namespace dnscov
