#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "kmis/linalg.hpp"
#include "kmis/rng.hpp"

namespace kmis {

/// Deterministic policy: maps a state to the action it would take.
struct TargetPolicy {
    int action_dim = 0;
    std::function<Vec(const Vec&)> map;

    Vec operator()(const Vec& s) const { return map(s); }
};

/// Closed interval per action dimension, used for bin-mass queries.
using Box = std::vector<std::pair<double, double>>;

class BehaviorFamily {
public:
    virtual ~BehaviorFamily() = default;
    virtual int action_dim() const = 0;
    virtual double raw_density(const Vec& s, const Vec& a) const = 0;
    /// Probability of the action landing in the box, given the state.
    virtual double bin_mass(const Vec& s, const Box& bin) const = 0;
    virtual Vec sample(const Vec& s, Rng& rng) const = 0;
};

/// Stochastic logging policy with known density. Pointwise densities are
/// clipped from below at clip_floor; bin masses are exact (no clipping).
class BehaviorPolicy {
public:
    BehaviorPolicy() = default;
    BehaviorPolicy(std::shared_ptr<const BehaviorFamily> family, double clip_floor);

    int action_dim() const { return family_->action_dim(); }
    double raw_density(const Vec& s, const Vec& a) const;
    double density(const Vec& s, const Vec& a) const;
    double density_bin_mass(const Vec& s, const Box& bin) const;
    Vec sample(const Vec& s, Rng& rng) const;
    double clip_floor() const { return clip_floor_; }

private:
    std::shared_ptr<const BehaviorFamily> family_;
    double clip_floor_ = 0.0;
};

/// Isotropic Gaussian around a state-dependent mean: a ~ N(mean_fn(s), sd^2 I).
BehaviorPolicy make_gaussian_behavior(std::function<Vec(const Vec&)> mean_fn,
                                      int action_dim, double sd, double clip_floor);

/// Uniform over an axis-aligned box.
BehaviorPolicy make_uniform_box_behavior(Vec lo, Vec hi, double clip_floor);

/// Two-dimensional dosing behavior: first coordinate truncated normal on
/// [lo, hi] with mean mu + sigma*sqrt(0.5)*s[bmi_state_index] and sd
/// sigma*sqrt(0.5); second coordinate uniform on [lo, hi].
BehaviorPolicy make_dosing_behavior(double mu, double sigma, double lo, double hi,
                                    int bmi_state_index, double clip_floor);

}  // namespace kmis
