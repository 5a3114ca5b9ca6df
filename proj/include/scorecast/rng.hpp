#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "scorecast/normal.hpp"

namespace scorecast {

/// Derives independent stream seeds from one root seed (splitmix64 steps).
/// Used so that replication r of an experiment gets seed split_seed(root, r)
/// and streams never overlap by construction of distinct mt19937_64 seeds.
inline std::uint64_t split_seed(std::uint64_t root, std::uint64_t index) {
    std::uint64_t z = root + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic random source. All variates are derived from the raw
/// mt19937_64 stream by fixed arithmetic (no std::distribution objects,
/// whose output is implementation-defined), so a seed pins the exact
/// sequence on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal via inverse CDF.
    double normal() { return norm_quantile(uniform()); }

    /// Gamma(shape, 1) for shape >= 1, Marsaglia-Tsang squeeze method.
    double gamma(double shape) {
        if (!(shape >= 1.0)) throw std::invalid_argument("Rng::gamma: shape must be >= 1");
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = uniform();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) {
                return d * v;
            }
        }
    }

    /// Student-t with `nu` degrees of freedom, standardized to unit variance
    /// (requires nu > 2): t * sqrt((nu-2)/nu) where t = Z / sqrt(V/nu).
    double student_t_unit_variance(double nu) {
        if (!(nu > 2.0)) {
            throw std::invalid_argument("Rng::student_t_unit_variance: need nu > 2");
        }
        double z = normal();
        double v = gamma(0.5 * nu) * 2.0;
        double t = z / std::sqrt(v / nu);
        return t * std::sqrt((nu - 2.0) / nu);
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::uniform_index: n must be positive");
        // Rejection sampling on the top bits keeps the draw exactly uniform.
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace scorecast
