#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "thetamult/av_core.hpp"

namespace thetamult {

// Deterministic uniform doubles built from raw mt19937_64 output; avoids
// std::uniform_real_distribution, whose stream is implementation-defined.
class UniformRng {
public:
    explicit UniformRng(std::uint64_t seed) : engine_(seed) {}

    double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double range(double lo, double hi) { return lo + (hi - lo) * unit(); }
    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

// splitmix64 step; decorrelates per-sample seeds derived from one base seed.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
    std::uint64_t x = base + 0x9e3779b97f4a7c15ull * (stream + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

// Sample points z = tau u + D v with u, v uniform in [0,1)^g, or in the
// centered cell [-1/2,1/2)^g.  The centered cell covers the same torus but
// keeps theta magnitudes close to their minimum, which matters when the
// samples feed a least-squares system.
inline std::vector<CVector> lattice_domain_samples(const PeriodMatrix& pm,
                                                   const PolarizationType& type, int count,
                                                   std::uint64_t seed, bool centered = false) {
    UniformRng rng(seed);
    const int g = pm.genus();
    const double shift = centered ? 0.5 : 0.0;
    std::vector<CVector> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        RVector u(g), v(g);
        for (int i = 0; i < g; ++i) u(i) = rng.unit() - shift;
        for (int i = 0; i < g; ++i) v(i) = rng.unit() - shift;
        CVector z = CVector::Zero(g);
        for (int i = 0; i < g; ++i) {
            for (int j = 0; j < g; ++j) z(i) += pm.tau()(i, j) * u(j);
            z(i) += static_cast<double>(type.divisor(i)) * v(i);
        }
        out.push_back(std::move(z));
    }
    return out;
}

} // namespace thetamult
