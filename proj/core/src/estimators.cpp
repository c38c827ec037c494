#include "kmis/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kmis/errors.hpp"
#include "kmis/parallel.hpp"
#include "kmis/stats.hpp"

namespace kmis {

namespace {

constexpr double kWeightUnderflow = 1e-300;

EstimatorReport reduce_weighted(const Vec& weights, const Vec& rewards, double h,
                                double h_pow_da, bool self_normalize,
                                bool metric_applied) {
    const std::size_t n = weights.size();
    Vec weighted(n);
    for (std::size_t i = 0; i < n; ++i) weighted[i] = weights[i] * rewards[i];

    const double weight_sum = stable_sum(weights);
    const double weighted_sum = stable_sum(weighted);

    double max_w = 0.0;
    std::size_t n_used = 0;
    for (double w : weights) {
        if (w > 0.0) ++n_used;
        max_w = std::max(max_w, w);
    }

    EstimatorReport rep;
    rep.n_used = n_used;
    rep.bandwidth = h;
    rep.self_normalized = self_normalize;
    rep.weight_sum = weight_sum;
    rep.max_weight_share = weight_sum > 0.0 ? max_w / weight_sum : 0.0;
    rep.metric_applied = metric_applied;

    if (self_normalize) {
        if (!(weight_sum > 0.0))
            throw EmptyOverlapError(
                "self-normalized estimate undefined: all kernel weights are zero",
                weight_sum);
        rep.estimate = weighted_sum / weight_sum;
    } else {
        rep.estimate = weighted_sum /
                       (static_cast<double>(rewards.size()) * h_pow_da);
    }
    return rep;
}

}  // namespace

Vec kernel_weights(const LoggedDataset& data, const TargetPolicy& target, double h,
                   std::span<const Mat> transforms) {
    data.validate();
    if (!(h > 0.0)) throw std::invalid_argument("kernel_is: bandwidth must be > 0");
    const int da = data.action_dim;
    if (target.action_dim != da)
        throw std::invalid_argument("kernel_is: target action dimension mismatch");
    const bool with_transform = !transforms.empty();
    if (with_transform && transforms.size() != data.size())
        throw std::invalid_argument("kernel_is: one transform per row required");

    const std::size_t n = data.size();
    Vec weights(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const Vec s = data.state_vec(i);
        const Vec t = target(s);
        const auto a = data.action(i);
        Vec diff(da);
        for (int dd = 0; dd < da; ++dd) diff[dd] = a[dd] - t[dd];
        Vec u = with_transform ? transforms[i].transposed_mul(diff) : diff;
        for (double& x : u) x /= h;
        double k = gaussian_kernel(u);
        if (k < kWeightUnderflow) k = 0.0;
        weights[i] = k / data.behavior_density[i];
    });
    return weights;
}

namespace {

EstimatorReport kernel_is_impl(const LoggedDataset& data, const TargetPolicy& target,
                               double h, bool self_normalize,
                               std::span<const Mat> transforms) {
    const Vec weights = kernel_weights(data, target, h, transforms);
    return reduce_weighted(weights, data.rewards, h, std::pow(h, data.action_dim),
                           self_normalize, !transforms.empty());
}

}  // namespace

EstimatorReport kernel_is(const LoggedDataset& data, const TargetPolicy& target,
                          double h, bool self_normalize) {
    return kernel_is_impl(data, target, h, self_normalize, {});
}

EstimatorReport kernel_is(const LoggedDataset& data, const TargetPolicy& target,
                          double h, bool self_normalize,
                          std::span<const Mat> transforms) {
    if (transforms.empty())
        throw std::invalid_argument("kernel_is: empty transform list");
    return kernel_is_impl(data, target, h, self_normalize, transforms);
}

std::vector<Mat> metric_transforms(const LoggedDataset& data, const TargetPolicy& target,
                                   const RewardModel& model) {
    data.validate();
    const std::size_t n = data.size();
    std::vector<Mat> out(n);
    parallel_for(n, [&](std::size_t i) {
        const Vec s = data.state_vec(i);
        const Vec t = target(s);
        const SymMatrix hess = hessian_at(model, s, t);
        out[i] = transform_matrix(regularized_metric(hess));
    });
    return out;
}

EstimatorReport kmis_estimate(const LoggedDataset& data, const TargetPolicy& target,
                              const RewardModel& model, double h, bool self_normalize) {
    const auto transforms = metric_transforms(data, target, model);
    EstimatorReport rep = kernel_is_impl(data, target, h, self_normalize, transforms);
    rep.metric_applied = true;
    return rep;
}

EstimatorReport discretized_is(const LoggedDataset& data, const BehaviorPolicy& behavior,
                               const TargetPolicy& target, int bins_per_dim,
                               bool self_normalize) {
    data.validate();
    if (bins_per_dim < 1)
        throw std::invalid_argument("discretized_is: bins_per_dim must be >= 1");
    const int da = data.action_dim;
    if (behavior.action_dim() != da || target.action_dim != da)
        throw std::invalid_argument("discretized_is: action dimension mismatch");

    // Data-derived action box.
    Vec lo(da, 0.0), hi(da, 0.0);
    const std::size_t n = data.size();
    for (int dd = 0; dd < da; ++dd) {
        lo[dd] = hi[dd] = data.action(0)[dd];
    }
    for (std::size_t i = 1; i < n; ++i) {
        const auto a = data.action(i);
        for (int dd = 0; dd < da; ++dd) {
            lo[dd] = std::min(lo[dd], a[dd]);
            hi[dd] = std::max(hi[dd], a[dd]);
        }
    }
    Vec width(da);
    for (int dd = 0; dd < da; ++dd) {
        width[dd] = (hi[dd] - lo[dd]) / bins_per_dim;
        if (!(width[dd] > 0.0))
            throw std::invalid_argument("discretized_is: zero action range in dimension " +
                                        std::to_string(dd + 1));
    }

    const auto bin_index = [&](double x, int dd) {
        const auto raw = static_cast<long long>(std::floor((x - lo[dd]) / width[dd]));
        return static_cast<int>(std::clamp<long long>(raw, 0, bins_per_dim - 1));
    };

    Vec weights(n, 0.0);
    parallel_for(n, [&](std::size_t i) {
        const Vec s = data.state_vec(i);
        const Vec t = target(s);
        Box bin(da);
        bool inside = true;
        const auto a = data.action(i);
        for (int dd = 0; dd < da; ++dd) {
            const int bi = bin_index(t[dd], dd);
            const double b_lo = lo[dd] + bi * width[dd];
            const double b_hi = bi + 1 == bins_per_dim ? hi[dd] : b_lo + width[dd];
            bin[dd] = {b_lo, b_hi};
            // Half-open bins, closed at the top edge of the box.
            const bool in_dim = bi + 1 == bins_per_dim ? (a[dd] >= b_lo && a[dd] <= b_hi)
                                                       : (a[dd] >= b_lo && a[dd] < b_hi);
            inside = inside && in_dim;
        }
        if (!inside) return;
        const double mass = behavior.density_bin_mass(s, bin);
        if (!(mass > 0.0))
            throw InternalConsistencyError(
                "discretized_is: sample landed in a zero-mass bin");
        weights[i] = 1.0 / mass;
    });

    EstimatorReport rep =
        reduce_weighted(weights, data.rewards, 0.0, 1.0, self_normalize, false);
    rep.bandwidth = 0.0;
    return rep;
}

}  // namespace kmis
