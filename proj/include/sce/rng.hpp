#pragma once

#include <cstdint>
#include <string_view>

namespace sce::rng {

// SplitMix64 output scrambler (Steele, Lea & Flood 2014). One state step
// yields one 64-bit word.
inline uint64_t splitmix64_next(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Counter-based substream generator. A stream is addressed by a seed plus a
// sequence of integer/string parts; folding a part advances the state by one
// scrambled SplitMix64 step XORed with the part. The derivation is:
//
//   state <- seed
//   for each part p: state <- splitmix64_next(state XOR u64(p))
//
// where u64() is the integer itself or FNV-1a 64 of the string. Draws then
// walk the SplitMix64 sequence from the derived state. Identical
// (seed, parts...) always yields the identical draw sequence, independent of
// any other stream, which is what makes per-row and per-replicate work safe
// to schedule on any number of threads.
class Substream {
public:
    explicit Substream(uint64_t seed) : state_(seed) {}

    Substream& fold(uint64_t part) {
        uint64_t s = state_ ^ part;
        state_ = splitmix64_next(s);
        return *this;
    }

    Substream& fold(std::string_view part) { return fold(fnv1a64(part)); }

    uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in [0, 1) with 53 random bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, bound) via bitmask rejection.
    uint64_t next_below(uint64_t bound) {
        if (bound <= 1) return 0;
        uint64_t mask = ~uint64_t{0} >> __builtin_clzll(bound - 1 | 1);
        for (;;) {
            uint64_t v = next_u64() & mask;
            if (v < bound) return v;
        }
    }

private:
    uint64_t state_;
};

}  // namespace sce::rng
