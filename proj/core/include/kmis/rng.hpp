#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace kmis {

/// Deterministic random source. All transforms from raw 64-bit draws to
/// doubles are written out here instead of using std::*_distribution, so
/// streams are reproducible across standard libraries and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed), seed_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer on [0, n), rejection sampled to avoid modulo bias.
    std::uint64_t uniform_int(std::uint64_t n);
    /// Standard normal via inverse-CDF of uniform().
    double normal();
    double normal(double mean, double sd);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    /// Independent child stream determined by (root seed, salt). Does not
    /// consume state from this stream, so derivation order is irrelevant.
    Rng derived(std::uint64_t salt) const;

    std::uint64_t raw() { return engine_(); }
    std::uint64_t seed() const { return seed_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
};

}  // namespace kmis
