#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kmis/dataset.hpp"
#include "kmis/linalg.hpp"
#include "kmis/policies.hpp"

namespace kmis {

/// Anything that predicts the conditional reward mean and second moment at
/// a (state, action) pair. Implemented by the trained network and by exact
/// closed-form oracles used in tests.
class RewardModel {
public:
    virtual ~RewardModel() = default;
    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual double predict_mean(std::span<const double> s,
                                std::span<const double> a) const = 0;
    virtual double predict_second_moment(std::span<const double> s,
                                         std::span<const double> a) const = 0;
};

/// Exact closed-form stand-in: mean_fn plus a constant conditional variance.
class OracleRewardModel final : public RewardModel {
public:
    using MeanFn = std::function<double(std::span<const double>, std::span<const double>)>;

    OracleRewardModel(int state_dim, int action_dim, MeanFn mean_fn,
                      double conditional_variance = 0.0)
        : state_dim_(state_dim), action_dim_(action_dim), mean_fn_(std::move(mean_fn)),
          variance_(conditional_variance) {}

    int state_dim() const override { return state_dim_; }
    int action_dim() const override { return action_dim_; }
    double predict_mean(std::span<const double> s, std::span<const double> a) const override {
        return mean_fn_(s, a);
    }
    double predict_second_moment(std::span<const double> s,
                                 std::span<const double> a) const override {
        const double m = mean_fn_(s, a);
        return m * m + variance_;
    }

private:
    int state_dim_, action_dim_;
    MeanFn mean_fn_;
    double variance_;
};

struct RewardModelConfig {
    double learning_rate = 5e-4;
    int batch_size = 256;
    int max_epochs = 1000;
    int patience = 20;
    double validation_fraction = 0.2;
    double dropout = 0.5;
    double l2 = 0.0;
};

struct FitReport {
    int epochs_run = 0;
    double best_validation_nll = 0.0;
    double epoch0_validation_nll = 0.0;
    std::size_t n_train = 0;
    std::size_t n_validation = 0;
    std::uint64_t seed = 0;
};

/// Feed-forward regressor: two tanh layers of 128 units and a Gaussian head
/// emitting (mean, log-variance). Inputs and targets are standardized with
/// statistics from the training split; predictions are mapped back to the
/// raw reward scale. Prediction is deterministic (no dropout).
class MlpRewardModel final : public RewardModel {
public:
    static constexpr int kHidden = 128;

    int state_dim() const override { return state_dim_; }
    int action_dim() const override { return action_dim_; }

    double predict_mean(std::span<const double> s, std::span<const double> a) const override;
    double predict_second_moment(std::span<const double> s,
                                 std::span<const double> a) const override;

    /// Gradient of predict_mean w.r.t. the raw (s, a) input, by backprop.
    Vec input_gradient(std::span<const double> s, std::span<const double> a) const;

    std::string to_json() const;
    static MlpRewardModel from_json(const std::string& text);

    const RewardModelConfig& config() const { return config_; }

    friend std::pair<MlpRewardModel, FitReport> fit_reward_model(
        const LoggedDataset& data, const RewardModelConfig& config, std::uint64_t seed);

private:
    // Forward pass on a standardized input; returns (mean, clamped logvar).
    std::pair<double, double> forward_std(const double* x) const;
    void standardize(std::span<const double> s, std::span<const double> a,
                     double* out) const;

    int state_dim_ = 0, action_dim_ = 0, in_dim_ = 0;
    Vec w1_, b1_, w2_, b2_, w3_, b3_;  // w1: in x H, w2: H x H, w3: H x 2
    Vec input_mean_, input_sd_;
    double reward_mean_ = 0.0, reward_sd_ = 1.0;
    RewardModelConfig config_;
};

/// Trains with mini-batch Adam on the Gaussian negative log-likelihood,
/// early-stopping on a held-out validation split; returns the weights from
/// the best validation epoch.
std::pair<MlpRewardModel, FitReport> fit_reward_model(const LoggedDataset& data,
                                                      const RewardModelConfig& config,
                                                      std::uint64_t seed);

/// Central finite-difference Hessian of predict_mean in the action, with per
/// dimension step 1e-3*(1+|a_k|), mirrored so the result is exactly symmetric.
SymMatrix hessian_at(const RewardModel& model, std::span<const double> s,
                     std::span<const double> a);

/// Direct-method value: average model mean at (s, pi(s)) over dataset states.
double dm_estimate(const RewardModel& model, const LoggedDataset& data,
                   const TargetPolicy& target);

void save_model(const MlpRewardModel& model, const std::string& path);
MlpRewardModel load_model(const std::string& path);

}  // namespace kmis
