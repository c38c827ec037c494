#pragma once

#include <span>
#include <vector>

#include "kmis/dataset.hpp"
#include "kmis/linalg.hpp"
#include "kmis/metric.hpp"
#include "kmis/policies.hpp"
#include "kmis/reward_model.hpp"

namespace kmis {

struct EstimatorReport {
    double estimate = 0.0;
    std::size_t n_used = 0;      // samples with nonzero kernel weight
    double bandwidth = 0.0;      // 0 when not a kernel estimator
    bool self_normalized = false;
    double weight_sum = 0.0;     // sum of K(u_i)/pb_i (or bin weights)
    double max_weight_share = 0.0;
    bool metric_applied = false;
};

/// Per-row kernel importance weights K(u_i)/pb_i, where u_i is the
/// (optionally transformed) action difference over the bandwidth. Kernel
/// values below 1e-300 are flushed to zero.
Vec kernel_weights(const LoggedDataset& data, const TargetPolicy& target, double h,
                   std::span<const Mat> transforms = {});

/// Kernel-relaxed importance sampling. Without transforms the kernel input
/// is (a_i - pi(s_i))/h; with per-row transforms it is L_i^T (a_i - pi(s_i))/h.
/// Sums use sorted pairwise reduction, so results do not depend on row order
/// or thread count.
EstimatorReport kernel_is(const LoggedDataset& data, const TargetPolicy& target,
                          double h, bool self_normalize);
EstimatorReport kernel_is(const LoggedDataset& data, const TargetPolicy& target,
                          double h, bool self_normalize,
                          std::span<const Mat> transforms);

/// Per-row kernel transforms from the locally learned metric: for each row,
/// the Hessian of the model mean at (s_i, pi(s_i)) -> regularized metric -> L.
std::vector<Mat> metric_transforms(const LoggedDataset& data, const TargetPolicy& target,
                                   const RewardModel& model);

/// Metric-applied kernel IS (computes metric_transforms internally).
EstimatorReport kmis_estimate(const LoggedDataset& data, const TargetPolicy& target,
                              const RewardModel& model, double h, bool self_normalize);

/// Histogram baseline: per-dimension equal-width bins over the data-derived
/// action box; weight = indicator(a_i in target bin) / behavior bin mass.
EstimatorReport discretized_is(const LoggedDataset& data, const BehaviorPolicy& behavior,
                               const TargetPolicy& target, int bins_per_dim,
                               bool self_normalize);

}  // namespace kmis
