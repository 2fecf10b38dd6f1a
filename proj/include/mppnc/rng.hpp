#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mppnc {

/// splitmix64 finalizer; used both as a mixer and to derive child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d49bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based stream derivation: hashing (master, k1, k2, ...) gives a
/// seed that depends only on the logical coordinates of a trial, never on
/// scheduling, so results are identical for any worker count.
inline std::uint64_t derive_seed(std::uint64_t master) { return splitmix64(master); }

template <class... Rest>
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t k, Rest... rest) {
    return derive_seed(splitmix64(master ^ (k + 0x632be59bd9b4e019ULL)), rest...);
}

/// Deterministic random stream. mt19937_64 has a standard-mandated sequence;
/// the uniform/Gaussian mappings below are ours, so draws are reproducible
/// across platforms and library versions.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0,1) with 53-bit resolution.
    double next_double() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in (0,1], safe as a log() argument.
    double next_double_open() { return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53; }

    bool next_bit() { return (engine_() >> 63) != 0; }

    /// One standard complex Gaussian pair via Box-Muller (exactly two draws).
    void next_gaussian_pair(double& z0, double& z1) {
        const double u1 = next_double_open();
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(t);
        z1 = r * std::sin(t);
    }

  private:
    std::mt19937_64 engine_;
};

} // namespace mppnc
