#pragma once

#include <cstdint>
#include <random>

namespace varskip {

// Seeded RNG with hand-rolled draw primitives so that sequences are
// reproducible across standard library implementations (std distributions
// are not portable). Engine state advances one mt19937_64 step per draw.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform integer in [0, n). n must be > 0. Rejection-free modulo with a
    // widening multiply (Lemire); bias is negligible for n << 2^64 and the
    // result is fully deterministic.
    uint64_t uniform_u64(uint64_t n) {
        return static_cast<uint64_t>((static_cast<__uint128_t>(engine_()) * n) >> 64);
    }

    int uniform_int(int n) { return static_cast<int>(uniform_u64(static_cast<uint64_t>(n))); }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform_real() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform double in [lo, hi).
    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    // Derive an independent stream (e.g. per worker or per query) without
    // correlated low bits: splitmix64 finalizer over (seed', stream).
    static uint64_t derive_seed(uint64_t base, uint64_t stream) {
        uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace varskip
