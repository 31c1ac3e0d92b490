#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace bvmi {

// splitmix64 finalizer. Scrambles a 64-bit word into a well-mixed seed.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed of the `stream`-th child of `seed`. The derivation is part of the
// reproducibility contract: reruns of any sub-computation regenerate the
// same stream from (seed, stream) alone, independent of execution order.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream * 0xD1B54A32D192ED03ULL + 1));
}

// Seedable generator with explicit, platform-stable output mapping.
// std::mt19937_64 supplies the raw bits; the uniform and normal transforms
// are spelled out here (53-bit mantissa map, Box-Muller) because the
// distributions in <random> are implementation-defined and would break
// bit-reproducibility of saved experiment artifacts across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 random mantissa bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Standard normal via Box-Muller. Two uniforms are consumed per draw;
    // no spare is cached, so the engine state after n draws depends only
    // on n.
    double normal() {
        const double u1 = 1.0 - uniform01(); // (0, 1]
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd z(n);
        for (Eigen::Index i = 0; i < n; ++i) z[i] = normal();
        return z;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace bvmi
