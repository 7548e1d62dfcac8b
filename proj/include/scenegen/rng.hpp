#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "scenegen/util.hpp"

namespace scenegen {

// Deterministic RNG wrapper. std::mt19937_64 output is pinned by the standard;
// the distribution helpers below avoid std::uniform_*_distribution, whose
// output differs between standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next() { return engine_(); }

    // Unbiased-enough integer in [0, n) via 128-bit multiply (Lemire map).
    uint64_t below(uint64_t n) {
        if (n == 0) fail("InvalidArgument", "Rng::below(0)");
        return static_cast<uint64_t>(
            (static_cast<unsigned __int128>(engine_()) * n) >> 64);
    }

    int below_int(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

    // Uniform double in [0, 1) with 53 bits of precision.
    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

// Labeled substream derivation: each pipeline concern (terrain, placement,
// patch, ...) draws from its own stream so a change in one stage's consumption
// pattern cannot perturb another stage.
inline uint64_t derive_seed(uint64_t master, std::string_view label) {
    return fnv1a64(label) ^ (master * 0x9e3779b97f4a7c15ULL);
}

}  // namespace scenegen
