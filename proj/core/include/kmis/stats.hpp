#pragma once

#include <span>

#include "kmis/rng.hpp"

namespace kmis {

/// Standard multivariate Gaussian density (2*pi)^(-d/2) exp(-|u|^2/2).
double gaussian_kernel(std::span<const double> u);

/// Roughness of the standard Gaussian kernel: integral of K(u)^2 over R^d,
/// which is (4*pi)^(-d/2).
double kernel_roughness(int dim);

double normal_pdf(double x);
double normal_cdf(double x);
/// Inverse standard normal CDF, accurate to near machine precision.
double normal_quantile(double p);

/// Normal distribution restricted to [lo, hi], density renormalized by the
/// interval mass. Sampling is by inverse CDF on the truncated interval.
class TruncatedNormal {
public:
    TruncatedNormal(double mean, double sd, double lo, double hi);

    double density(double x) const;
    double cdf(double x) const;
    // Mass of [a, b] under the truncated distribution.
    double interval_mass(double a, double b) const;
    double sample(Rng& rng) const;

    double mean() const { return mean_; }
    double sd() const { return sd_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

private:
    double mean_, sd_, lo_, hi_;
    double cdf_lo_, mass_;
};

}  // namespace kmis
