#pragma once

#include <cstdint>

namespace ibrkit {

// SplitMix64 (Steele, Lea, Vigna). Chosen for the corpus generator because the
// algorithm is tiny, widely documented, and identical across platforms, which
// keeps generated corpora reproducible from the recorded seed alone. The
// generator name is echoed into the ground-truth sidecar.
class SplitMix64 {
public:
    explicit SplitMix64(uint64_t seed) : state_(seed) {}

    uint64_t next() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). Modulo bias is irrelevant at the scales used
    // here and keeps the mapping trivially portable.
    uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }

    // Uniform double in (0, 1].
    double unit_positive() {
        return static_cast<double>((next() >> 11) + 1) * 0x1p-53;
    }

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1p-53; }

private:
    uint64_t state_;
};

}  // namespace ibrkit
