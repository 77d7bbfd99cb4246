#include "riekit/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace riekit {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t Rng::uniform_below(std::uint64_t bound) {
    if (bound == 0) {
        throw std::invalid_argument("Rng::uniform_below: bound must be positive");
    }
    // Reject the tail that would bias the modulus.
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % bound;
        }
    }
}

double Rng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (has_spare_normal_) {
        has_spare_normal_ = false;
        return spare_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform01() - 1.0;
        v = 2.0 * uniform01() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_normal_ = v * factor;
    has_spare_normal_ = true;
    return u * factor;
}

double Rng::gamma(double shape) {
    if (!(shape > 1e-3)) {
        throw std::invalid_argument("Rng::gamma: shape must exceed 1e-3");
    }
    if (shape < 1.0) {
        // Boost: G(a) = G(a+1) * U^(1/a).
        const double g = gamma(shape + 1.0);
        const double u = uniform01();
        return g * std::pow(u > 0.0 ? u : std::numeric_limits<double>::min(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double Rng::student_t(double dof) {
    if (std::isinf(dof)) {
        return normal();
    }
    if (!(dof > 0.0)) {
        throw std::invalid_argument("Rng::student_t: dof must be positive");
    }
    const double z = normal();
    const double chi2 = 2.0 * gamma(0.5 * dof);
    return z / std::sqrt(chi2 / dof);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) {
        throw std::invalid_argument("Rng::sample_without_replacement: k exceeds n");
    }
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    // Partial Fisher-Yates: after i swaps the first i entries are the draw.
    for (std::size_t i = 0; i < k; ++i) {
        std::size_t j = i + static_cast<std::size_t>(uniform_below(n - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

}  // namespace riekit
