#ifndef SPRINGY_RNG_HPP
#define SPRINGY_RNG_HPP

#include <cmath>
#include <cstdint>

namespace springy {

inline std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with per-stream state derived from (seed, run, member).
// Streams are independent of scheduling, so ensemble output is reproducible
// for any worker count.
class Rng {
public:
    Rng() : Rng(0, 0, 0) {}

    Rng(std::uint64_t seed, std::uint64_t run, std::uint64_t member) {
        std::uint64_t x = seed;
        x ^= 0x6A09E667F3BCC908ULL + splitmix64(x);
        x ^= run * 0xD1B54A32D192ED03ULL;
        (void)splitmix64(x);
        x ^= member * 0x9E6C63D0876A90ECULL;
        for (auto& w : s_) {
            w = splitmix64(x);
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1; // all-zero state is invalid
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // Positive exponential deviate with unit rate.
    double exponential() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return -std::log(u);
    }

    int sign() { return (next_u64() & 1u) ? 1 : -1; }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t s_[4];
};

} // namespace springy

#endif
