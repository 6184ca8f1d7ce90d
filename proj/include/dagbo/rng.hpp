#ifndef DAGBO_RNG_HPP
#define DAGBO_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dagbo {

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Counter-based seed split: child = mix(parent, tag_0, tag_1, ...).
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> tags);

/**
 * Seeded random stream with a portable sampling path.
 *
 * std::normal_distribution and friends are implementation-defined, so the
 * uniform and normal variates are built directly from mt19937_64 output to
 * keep sample tensors bit-identical across standard libraries.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform();

    /// Uniform on (0, 1); never returns 0.
    double uniform_open();

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via the Marsaglia polar method.
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace dagbo

#endif  // DAGBO_RNG_HPP
