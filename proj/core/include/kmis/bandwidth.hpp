#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "kmis/dataset.hpp"
#include "kmis/linalg.hpp"
#include "kmis/policies.hpp"
#include "kmis/reward_model.hpp"

namespace kmis {

/// Plug-in constants of the leading-order MSE
/// lomse(h) = h^4 * c_b + c_v / (n * h^d_a).
struct LomseConstants {
    double c_b = 0.0;
    double c_v = 0.0;
    std::size_t n = 0;
    int d_a = 0;
};

struct BandwidthGrid {
    Vec values;  // strictly descending, all positive

    void validate() const;
};

/// Parses "2^a..2^b" (integer exponents, either order) into a descending
/// geometric grid.
BandwidthGrid parse_bandwidth_grid(const std::string& text);

/// Squared-bias constant: (1/4) * (mean over dataset states of the Hessian
/// trace of the model mean at (s, pi(s)))^2 — the mean is taken before
/// squaring.
double estimate_cb(const RewardModel& model, const LoggedDataset& data,
                   const TargetPolicy& target);

/// Variance constant: R(K) * mean over dataset states of
/// predict_second_moment(s, pi(s)) / clipped behavior density at (s, pi(s)).
double estimate_cv(const RewardModel& model, const LoggedDataset& data,
                   const TargetPolicy& target, const BehaviorPolicy& behavior);

double lomse(double h, const LomseConstants& k);

/// Closed-form minimizer (d_a * c_v / (4 n c_b))^(1/(d_a+4)).
/// Throws DegenerateBiasError when c_b == 0.
double optimal_bandwidth(const LomseConstants& k);

struct SlopePoint {
    double bandwidth = 0.0;
    double estimate = 0.0;
    double width = 0.0;
    bool ok = false;
    bool accepted = false;
    std::string error;
};

struct SlopeSelection {
    double bandwidth = 0.0;
    std::vector<SlopePoint> points;  // largest bandwidth first
};

/// Evaluates one grid bandwidth; returns (estimate, interval half-width).
using SlopeEvaluator = std::function<std::pair<double, double>(double)>;

/// Lepski-style selection: walk the grid from the largest bandwidth and keep
/// going while the new confidence interval intersects every interval accepted
/// so far; return the last accepted bandwidth. Grid points whose evaluation
/// throws are skipped; if all fail, throws SelectionFailedError.
SlopeSelection slope_select(const BandwidthGrid& grid, const SlopeEvaluator& eval);

/// Self-normalized kernel-IS evaluator for slope_select: the estimate is
/// sum(w r)/sum(w) and the half-width is 2*sqrt(Var_pop(t)/N) with
/// t_i = w_i r_i / mean(w). The dataset/target (and transforms, if given)
/// are borrowed and must outlive the evaluator.
SlopeEvaluator make_kernel_slope_evaluator(const LoggedDataset& data,
                                           const TargetPolicy& target);
SlopeEvaluator make_kernel_slope_evaluator(const LoggedDataset& data,
                                           const TargetPolicy& target,
                                           std::span<const Mat> transforms);

}  // namespace kmis
