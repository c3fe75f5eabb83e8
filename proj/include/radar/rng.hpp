#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "radar/textio.hpp"

// Hand-rolled generators so that simulation output is bit-identical across
// standard libraries and platforms. std::normal_distribution and friends are
// implementation-defined and must not appear anywhere in the simulation path.

namespace radar {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Stateless mixing of key tuples into a single 64-bit value.
inline std::uint64_t mix64(std::uint64_t a) {
    std::uint64_t s = a;
    return splitmix64(s);
}
inline std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
    std::uint64_t s = a;
    std::uint64_t h = splitmix64(s);
    s = h ^ b;
    return splitmix64(s);
}
template <typename... Rest>
std::uint64_t mix64(std::uint64_t a, std::uint64_t b, std::uint64_t c, Rest... rest) {
    return mix64(mix64(a, b), c, static_cast<std::uint64_t>(rest)...);
}

inline double u64_to_unit(std::uint64_t x) {
    // [0,1) with 53 random bits
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// xoshiro256** -- the sequential generator for world evolution.
class Rng {
  public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // [0,1)
    double next_unit() { return u64_to_unit(next_u64()); }

    // uniform in [0,n) without modulo bias
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (true) {
            std::uint64_t x = next_u64();
            if (x >= threshold) return x % n;
        }
    }

    // standard normal via Box-Muller (consumes exactly two words)
    double next_gaussian() {
        double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0,1]
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::array<std::uint64_t, 4> state() const { return state_; }
    void set_state(const std::array<std::uint64_t, 4>& s) { state_ = s; }

    bool operator==(const Rng&) const = default;

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_{};
};

// Pure keyed draws: same key, same value. Used for model noise so that
// scoring is a pure function of its inputs.
inline double keyed_unit(std::uint64_t key) { return u64_to_unit(mix64(key, 0x9d2c5680ULL)); }

inline double keyed_gaussian(std::uint64_t key) {
    std::uint64_t a = mix64(key, 0x85ebca6bULL);
    std::uint64_t b = mix64(key, 0xc2b2ae35ULL);
    double u1 = static_cast<double>((a >> 11) + 1) * 0x1.0p-53;
    double u2 = u64_to_unit(b);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline std::string rng_state_to_hex(const Rng& rng) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (std::uint64_t word : rng.state()) {
        for (int shift = 60; shift >= 0; shift -= 4) out.push_back(digits[(word >> shift) & 0xF]);
    }
    return out;
}

}  // namespace radar
