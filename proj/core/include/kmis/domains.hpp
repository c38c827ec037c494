#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "kmis/dataset.hpp"
#include "kmis/policies.hpp"
#include "kmis/reward_model.hpp"

namespace kmis {

/// A synthetic environment: state sampler, logging policy, deterministic
/// target, conditional reward, and the closed-form value of the target.
struct SyntheticDomain {
    std::string name;
    int state_dim = 0;
    int action_dim = 0;
    std::function<Vec(Rng&)> sample_state;
    BehaviorPolicy behavior;
    TargetPolicy target;
    std::function<double(const Vec&, const Vec&)> mean_reward;
    double noise_sd = 0.0;  // Gaussian noise around mean_reward (0 = exact)
    double true_value = 0.0;
};

/// Quadratic bowl -(s-a)^T [[11,9],[9,11]] (s-a) with Gaussian reward noise;
/// states uniform on [-1,1]^2, behavior N(s + 0.2, 0.5^2 I) clipped at 0.1,
/// target pi(s) = s. True value 0.
SyntheticDomain make_quadratic(double noise_sd = 0.5);

/// Reward -|0.5 s_1 - a_1| depending only on the first action dimension;
/// extra dummy dims raise the action dimension beyond the base 2. States and
/// actions uniform on [-1,1] per dim, target pi(s) = 0.5 s. True value 0.
SyntheticDomain make_abs_error(int extra_dummy_dims = 0);

/// Four exponential bumps, r = -max(f1..f4), uniform states/actions on
/// [-1,1]^2, target pi(s) = s + (0.5, 0). True value -1.
SyntheticDomain make_multimodal();

/// Monte Carlo mean of mean_reward(s, pi(s)) over sampled states.
double true_value_mc(const SyntheticDomain& domain, std::size_t n_states,
                     std::uint64_t seed);
struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};
McEstimate true_value_mc_detail(const SyntheticDomain& domain, std::size_t n_states,
                                std::uint64_t seed);

/// Exact reward oracle backed by the domain's closed-form mean reward, with
/// the noise variance as the conditional variance.
OracleRewardModel oracle_model(const SyntheticDomain& domain);

LoggedDataset generate_dataset(const SyntheticDomain& domain, std::size_t n,
                               std::uint64_t seed);
LoggedDataset generate_dataset(const SyntheticDomain& domain,
                               const BehaviorPolicy& behavior, std::size_t n,
                               std::uint64_t seed);

/// Patient table in the dosing benchmark's shape: 81 standardized features,
/// a therapeutic dose, and a BMI z-score per patient. Dose bounds and
/// moments are derived from the dose column.
struct WarfarinTable {
    std::vector<double> features;  // n x 81, row-major
    Vec dose;
    Vec bmi_z;
    double dose_lo = 0.0, dose_hi = 0.0;
    double mu = 0.0, sigma = 0.0;

    static constexpr int kFeatures = 81;
    std::size_t size() const { return dose.size(); }
};

/// CSV with header f_1..f_81,dose,bmi_z.
WarfarinTable warfarin_load(const std::string& path);
void warfarin_save(const WarfarinTable& table, const std::string& path);

/// Random schema-conforming table: standard-normal features and BMI z-scores,
/// log-normal doses clamped to a plausible range.
WarfarinTable warfarin_synthetic(std::size_t n_patients, std::uint64_t seed);

/// States are the 81 features with the BMI z-score appended (dim 82).
/// Actions: dose ~ truncated normal around mu + sigma*sqrt(0.5)*bmi_z, and an
/// irrelevant second dimension uniform over the dose range. Reward is
/// -max(|a_1 - dose*| - 0.1 dose*, 0) against the patient's own dose.
/// n_rows = 0 uses each patient once; otherwise patients are resampled with
/// replacement to the requested size.
LoggedDataset warfarin_make_logged(const WarfarinTable& table, std::uint64_t seed,
                                   std::size_t n_rows = 0);

/// Behavior density family of the dosing benchmark (clip floor 0.1).
BehaviorPolicy warfarin_behavior(const WarfarinTable& table);

/// pi(s) = (s_BMI, 0) with s_BMI the appended z-score coordinate.
TargetPolicy warfarin_target(int state_dim);

}  // namespace kmis
