#pragma once

#include <cstdint>
#include <random>

namespace semcomm {

// SplitMix64 finalizer. Used to derive independent stream seeds from a
// (seed, counter) pair so every consumer of randomness can be replayed alone.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t counter);

// Seedable generator over std::mt19937_64 with a Box-Muller Gaussian.
// Uniform doubles are built from the top 53 bits, so the sequence is fixed by
// the standard and identical across platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Standard normal.
    double gaussian();
    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace semcomm
