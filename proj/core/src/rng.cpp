#include "kmis/rng.hpp"

#include "kmis/stats.hpp"

namespace kmis {

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) return 0;
    // Largest multiple of n that fits in 64 bits; reject draws above it.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    // uniform() can return exactly 0, which the quantile maps to -inf;
    // nudge into the open interval.
    double u = uniform();
    if (u <= 0.0) u = 0x1.0p-53;
    return normal_quantile(u);
}

double Rng::normal(double mean, double sd) {
    return mean + sd * normal();
}

Rng Rng::derived(std::uint64_t salt) const {
    std::seed_seq seq{static_cast<std::uint32_t>(seed_ >> 32),
                      static_cast<std::uint32_t>(seed_),
                      static_cast<std::uint32_t>(salt >> 32),
                      static_cast<std::uint32_t>(salt)};
    std::mt19937_64 child;
    child.seed(seq);
    // Re-wrap: recover a 64-bit root for the child so further derivation
    // from it keeps working.
    Rng out(0);
    out.engine_ = child;
    out.seed_ = seed_ ^ (salt * 0x9e3779b97f4a7c15ull + 0x632be59bd9b4e019ull);
    return out;
}

}  // namespace kmis
