#include "kmis/bandwidth.hpp"

#include <cmath>
#include <stdexcept>

#include "kmis/errors.hpp"
#include "kmis/estimators.hpp"
#include "kmis/parallel.hpp"
#include "kmis/stats.hpp"

namespace kmis {

void BandwidthGrid::validate() const {
    if (values.empty()) throw std::invalid_argument("bandwidth grid: empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0))
            throw std::invalid_argument("bandwidth grid: values must be positive");
        if (i > 0 && !(values[i] < values[i - 1]))
            throw std::invalid_argument("bandwidth grid: values must be strictly descending");
    }
}

BandwidthGrid parse_bandwidth_grid(const std::string& text) {
    const auto fail = [&] {
        throw std::invalid_argument("bandwidth grid: expected \"2^a..2^b\", got \"" +
                                    text + "\"");
    };
    const auto sep = text.find("..");
    if (sep == std::string::npos) fail();
    const auto parse_exp = [&](const std::string& part) {
        if (part.size() < 3 || part[0] != '2' || part[1] != '^') fail();
        std::size_t pos = 0;
        int e = 0;
        try {
            e = std::stoi(part.substr(2), &pos);
        } catch (const std::exception&) {
            fail();
        }
        if (pos != part.size() - 2) fail();
        return e;
    };
    int a = parse_exp(text.substr(0, sep));
    int b = parse_exp(text.substr(sep + 2));
    if (a < b) std::swap(a, b);
    BandwidthGrid grid;
    for (int e = a; e >= b; --e) grid.values.push_back(std::pow(2.0, e));
    grid.validate();
    return grid;
}

double estimate_cb(const RewardModel& model, const LoggedDataset& data,
                   const TargetPolicy& target) {
    data.validate();
    const std::size_t n = data.size();
    Vec traces(n);
    parallel_for(n, [&](std::size_t i) {
        const Vec s = data.state_vec(i);
        const Vec t = target(s);
        traces[i] = hessian_at(model, s, t).trace();
    });
    const double mean_trace = stable_sum(traces) / static_cast<double>(n);
    return 0.25 * mean_trace * mean_trace;
}

double estimate_cv(const RewardModel& model, const LoggedDataset& data,
                   const TargetPolicy& target, const BehaviorPolicy& behavior) {
    data.validate();
    const std::size_t n = data.size();
    Vec terms(n);
    parallel_for(n, [&](std::size_t i) {
        const Vec s = data.state_vec(i);
        const Vec t = target(s);
        terms[i] = model.predict_second_moment(s, t) / behavior.density(s, t);
    });
    return kernel_roughness(data.action_dim) * stable_sum(terms) /
           static_cast<double>(n);
}

double lomse(double h, const LomseConstants& k) {
    if (!(h > 0.0)) throw std::invalid_argument("lomse: h must be > 0");
    return h * h * h * h * k.c_b +
           k.c_v / (static_cast<double>(k.n) * std::pow(h, k.d_a));
}

double optimal_bandwidth(const LomseConstants& k) {
    if (!std::isfinite(k.c_b) || !std::isfinite(k.c_v) || k.c_b < 0.0 ||
        !(k.c_v > 0.0) || k.n < 1 || k.d_a < 1)
        throw std::invalid_argument("optimal_bandwidth: invalid constants");
    if (k.c_b == 0.0)
        throw DegenerateBiasError(
            "optimal_bandwidth: zero curvature constant, minimizer diverges");
    const double base =
        k.d_a * k.c_v / (4.0 * static_cast<double>(k.n) * k.c_b);
    return std::pow(base, 1.0 / (k.d_a + 4));
}

SlopeSelection slope_select(const BandwidthGrid& grid, const SlopeEvaluator& eval) {
    grid.validate();
    SlopeSelection sel;
    sel.points.reserve(grid.values.size());

    bool stopped = false;
    std::vector<std::size_t> accepted;
    for (double h : grid.values) {
        SlopePoint pt;
        pt.bandwidth = h;
        try {
            const auto [est, width] = eval(h);
            pt.estimate = est;
            pt.width = width;
            pt.ok = true;
        } catch (const std::exception& e) {
            pt.error = e.what();
        }
        sel.points.push_back(pt);
        if (stopped || !sel.points.back().ok) continue;

        const std::size_t ci = sel.points.size() - 1;
        bool intersects_all = true;
        for (std::size_t pi : accepted) {
            const SlopePoint& prev = sel.points[pi];
            if (std::abs(sel.points[ci].estimate - prev.estimate) >
                sel.points[ci].width + prev.width) {
                intersects_all = false;
                break;
            }
        }
        if (intersects_all) {
            accepted.push_back(ci);
            sel.points[ci].accepted = true;
            sel.bandwidth = sel.points[ci].bandwidth;
        } else {
            stopped = true;
        }
    }
    if (accepted.empty())
        throw SelectionFailedError("slope_select: estimator failed at every grid point");
    return sel;
}

SlopeEvaluator make_kernel_slope_evaluator(const LoggedDataset& data,
                                           const TargetPolicy& target) {
    return make_kernel_slope_evaluator(data, target, {});
}

SlopeEvaluator make_kernel_slope_evaluator(const LoggedDataset& data,
                                           const TargetPolicy& target,
                                           std::span<const Mat> transforms) {
    return [&data, &target, transforms](double h) {
        const Vec w = kernel_weights(data, target, h, transforms);
        const std::size_t n = w.size();
        const double mean_w = stable_sum(w) / static_cast<double>(n);
        if (!(mean_w > 0.0))
            throw EmptyOverlapError("slope evaluator: zero kernel mass", 0.0);
        Vec t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = w[i] * data.rewards[i] / mean_w;
        const double est = stable_sum(t) / static_cast<double>(n);
        Vec dev(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double d = t[i] - est;
            dev[i] = d * d;
        }
        const double var_t = stable_sum(dev) / static_cast<double>(n);
        const double width = 2.0 * std::sqrt(var_t / static_cast<double>(n));
        return std::make_pair(est, width);
    };
}

}  // namespace kmis
