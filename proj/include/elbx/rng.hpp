#pragma once

#include <cstdint>

namespace elbx {

// xoshiro256** 1.0 (Blackman/Vigna public-domain constants), seeded through
// SplitMix64. All drawing goes through this stream so identical seeds give
// identical results on every platform.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : seed_(seed) {
        uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    uint64_t next() {
        uint64_t result = rotl(state_[1] * 5, 7) * 9;
        uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Unbiased uniform draw from [0, n) (Lemire multiply-shift with
    // rejection).
    uint64_t below(uint64_t n) {
        unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        uint64_t low = static_cast<uint64_t>(m);
        if (low < n) {
            uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                m = static_cast<unsigned __int128>(next()) * n;
                low = static_cast<uint64_t>(m);
            }
        }
        return static_cast<uint64_t>(m >> 64);
    }

    bool coin() { return (next() >> 63) != 0; }

    // Deterministic sub-stream for task (a, b, c); independent of the order
    // in which workers pick up tasks.
    RngStream split(uint64_t a, uint64_t b, uint64_t c) const {
        uint64_t x = seed_;
        x = mix(x + 0x9E3779B97F4A7C15ull * (a + 1));
        x = mix(x + 0xBF58476D1CE4E5B9ull * (b + 1));
        x = mix(x + 0x94D049BB133111EBull * (c + 1));
        return RngStream(x);
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    static uint64_t mix(uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9E3779B97F4A7C15ull);
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    uint64_t seed_;
    uint64_t state_[4];
};

} // namespace elbx
