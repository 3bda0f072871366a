#pragma once

#include <complex>
#include <cstdint>
#include <string>

namespace lpdl {

/**
 * Deterministic random stream. splitmix64 core with Box-Muller gaussians,
 * so the same seed yields the same draws on every platform and toolchain
 * (std::normal_distribution is implementation-defined and would break the
 * reproducibility contract of the report writer).
 *
 * Streams are split per suite by hashing the suite name into the seed.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t hash_name(const std::string& name) {
        // FNV-1a; stable across platforms.
        std::uint64_t h = 1469598103934665603ull;
        for (unsigned char c : name) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return h;
    }

    static Rng stream(std::uint64_t seed, const std::string& name) {
        return Rng(seed ^ hash_name(name));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller (one value per call; pair cached).
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        while (u1 == 0.0) u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Complex standard normal (independent real and imaginary parts).
    std::complex<double> cgaussian() {
        double re = gaussian();
        double im = gaussian();
        return {re, im};
    }

private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lpdl
