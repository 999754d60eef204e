#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace volley {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seeded random stream. Distributions are computed from the raw engine
/// output here rather than through <random> distributions, whose results are
/// implementation-defined; traces stay byte-identical across standard
/// libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(mix64(seed)) {}

    /// Stream `index` of family `family` derived from a root seed. Adding
    /// streams never perturbs existing ones.
    static Rng stream(std::uint64_t root_seed, std::uint64_t family, std::uint64_t index) {
        return Rng(mix64(mix64(root_seed ^ (family * 0x632be59bd9b4e019ULL)) + index));
    }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) { return next() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    double normal() {
        // Box-Muller; one draw discarded to keep the stream stateless.
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// exp(N(mu, sigma^2)).
    double lognormal(double mu, double sigma) { return std::exp(mu + sigma * normal()); }

private:
    std::mt19937_64 engine_;
};

}  // namespace volley
