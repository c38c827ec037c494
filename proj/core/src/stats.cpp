#include "kmis/stats.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kmis/errors.hpp"

namespace kmis {

double gaussian_kernel(std::span<const double> u) {
    double sq = 0.0;
    for (double x : u) sq += x * x;
    const double d = static_cast<double>(u.size());
    return std::pow(2.0 * std::numbers::pi, -0.5 * d) * std::exp(-0.5 * sq);
}

double kernel_roughness(int dim) {
    if (dim < 1) throw std::invalid_argument("kernel_roughness: dim must be >= 1");
    return std::pow(4.0 * std::numbers::pi, -0.5 * dim);
}

double normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

namespace {

// Rational approximation to the standard normal quantile (relative error
// ~1e-9), then one Halley step against erfc to reach near machine precision.
double quantile_seed(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;

    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -INFINITY;
        if (p == 1.0) return INFINITY;
        throw std::invalid_argument("normal_quantile: p outside [0,1]");
    }
    double x = quantile_seed(p);
    // Halley refinement on f(x) = cdf(x) - p.
    double e = normal_cdf(x) - p;
    double u = e / normal_pdf(x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

TruncatedNormal::TruncatedNormal(double mean, double sd, double lo, double hi)
    : mean_(mean), sd_(sd), lo_(lo), hi_(hi) {
    if (!(sd > 0.0)) throw std::invalid_argument("TruncatedNormal: sd must be > 0");
    if (!(lo < hi)) throw std::invalid_argument("TruncatedNormal: requires lo < hi");
    cdf_lo_ = normal_cdf((lo - mean) / sd);
    const double cdf_hi = normal_cdf((hi - mean) / sd);
    mass_ = cdf_hi - cdf_lo_;
    if (!(mass_ > 1e-300)) {
        throw DegenerateTruncationError(
            "TruncatedNormal: interval [" + std::to_string(lo) + ", " +
            std::to_string(hi) + "] has numerically zero mass");
    }
}

double TruncatedNormal::density(double x) const {
    if (x < lo_ || x > hi_) return 0.0;
    return normal_pdf((x - mean_) / sd_) / (sd_ * mass_);
}

double TruncatedNormal::cdf(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    return (normal_cdf((x - mean_) / sd_) - cdf_lo_) / mass_;
}

double TruncatedNormal::interval_mass(double a, double b) const {
    if (b <= a) return 0.0;
    return cdf(b) - cdf(a);
}

double TruncatedNormal::sample(Rng& rng) const {
    double u = rng.uniform();
    double p = cdf_lo_ + u * mass_;
    // Clamp into the open unit interval before inverting.
    p = std::min(std::max(p, 0x1.0p-53), 1.0 - 0x1.0p-53);
    double x = mean_ + sd_ * normal_quantile(p);
    return std::min(std::max(x, lo_), hi_);
}

}  // namespace kmis
