#ifndef SMOOTHFIX_RNG_HPP
#define SMOOTHFIX_RNG_HPP

#include <cmath>
#include <cstdint>

namespace smoothfix {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// xoshiro256++ with splitmix64 seeding. Hand-rolled samplers keep every
/// stream reproducible bit-for-bit regardless of platform or worker count;
/// replica streams are derived from (seed, replica index) so parallel runs
/// are order-independent.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& w : s_) w = splitmix64(sm);
    }

    static Rng for_replica(std::uint64_t seed, std::uint64_t replica) {
        std::uint64_t sm = seed ^ (0xD1B54A32D192ED03ULL * (replica + 1));
        return Rng(splitmix64(sm));
    }

    /// Derive an independent stream, e.g. one per iteration of an outer loop.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t sm = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
        return splitmix64(sm);
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

    /// Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        // 53-bit mantissa, then nudge away from 0.
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double exponential(double rate = 1.0) { return -std::log(uniform()) / rate; }

    /// Count on {1,2,...} with P(k) = (1-q) q^{k-1}, mean 1/(1-q).
    std::uint64_t geometric1(double q) {
        if (q <= 0.0) return 1;
        double u = uniform();
        double k = std::floor(std::log(u) / std::log(q));
        return 1 + static_cast<std::uint64_t>(k);
    }

    /// Pareto on [1, inf), P(X > x) = x^{-index}.
    double pareto(double index) { return std::pow(uniform(), -1.0 / index); }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

} // namespace smoothfix

#endif
