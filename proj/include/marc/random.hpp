#pragma once

// Seeded randomness. The engine is std::mt19937_64, whose output sequence is
// fixed by the C++ standard; the Gaussian transform is done here rather than
// through std::normal_distribution, whose algorithm is implementation-defined.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

namespace marc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Sub-seed for trial `index` of a run seeded with `master`.
inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return splitmix64(master ^ splitmix64(index + 1));
}

class RandomSource {
public:
    explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_open_zero() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    /// Real N(0, 1); consumes two engine outputs (the sine branch of the pair is discarded).
    double gaussian() {
        const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
        return r * std::cos(2.0 * std::numbers::pi * uniform());
    }

    /// Circularly-symmetric CN(0, 1): real and imaginary parts each N(0, 1/2).
    /// Box-Muller in polar form, exactly two engine outputs per sample.
    std::complex<double> complex_gaussian() {
        const double r = std::sqrt(-std::log(uniform_open_zero()));
        const double phi = 2.0 * std::numbers::pi * uniform();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace marc
