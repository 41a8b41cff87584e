#pragma once

#include <cstdint>
#include <random>

namespace mcmwc {

// splitmix64 finalizer. Used for seed derivation and keyed coefficient draws so
// that every party holding the same key reproduces the same values without
// sharing an engine.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Deterministic sub-stream seed: distinct (a,b,c) give independent-looking seeds.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
    std::uint64_t h = mix64(base ^ 0xA0761D6478BD642Full);
    h = mix64(h ^ a);
    h = mix64(h ^ b);
    h = mix64(h ^ c);
    return h;
}

// Thin wrapper over std::mt19937_64. The engine's output sequence is pinned by
// the standard, so identical seeds give identical trajectories on any platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t u64() { return eng_(); }

    // uniform double in [0,1) with 53 random bits
    double u01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return u01() < p; }

    // uniform integer in [0, n), n >= 1
    std::uint64_t below(std::uint64_t n) {
        // rejection-free modulo is fine here; n is tiny compared to 2^64
        return eng_() % n;
    }

    std::mt19937_64& engine() { return eng_; }

  private:
    std::mt19937_64 eng_;
};

}  // namespace mcmwc
