#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace riekit {

// Mixes a 64-bit value through the SplitMix64 finalizer. Used to derive
// independent seeds from a master seed plus stream salts, so that every
// consumer of randomness (trial, window draw, shuffle, rotation stream)
// owns its own generator and results stay reproducible under any
// execution order.
std::uint64_t splitmix64(std::uint64_t x);

// derive_seed(master, s1, s2, ...) chains splitmix64 over the salts.
inline std::uint64_t derive_seed(std::uint64_t seed) { return splitmix64(seed); }

template <typename... Salts>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt, Salts... rest) {
    return derive_seed(splitmix64(seed ^ (salt + 0x9e3779b97f4a7c15ULL)), rest...);
}

// Seedable generator with portable derived variates. The raw stream is
// std::mt19937_64, whose output sequence is pinned by the standard; the
// uniform/normal/gamma transforms below are implemented here instead of
// relying on std::*_distribution, whose algorithms are
// implementation-defined and differ across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t uniform_below(std::uint64_t bound);

    // Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Standard normal via the Marsaglia polar method (no libm trig).
    double normal();

    // Gamma(shape, 1) for shape >= 1e-3, Marsaglia-Tsang squeeze method
    // with the standard boost for shape < 1.
    double gamma(double shape);

    // Student-t with dof degrees of freedom (unit scale, not unit
    // variance). dof = +infinity degenerates to normal().
    double student_t(double dof);

    // In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    // k distinct indices drawn uniformly from [0, n), in draw order.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

}  // namespace riekit
