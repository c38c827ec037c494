#include "kmis/policies.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "kmis/stats.hpp"

namespace kmis {

namespace {

void check_box(const Box& bin, int dim) {
    if (static_cast<int>(bin.size()) != dim)
        throw std::invalid_argument("bin_mass: bin dimension mismatch");
    for (const auto& [lo, hi] : bin) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi))
            throw std::invalid_argument("bin_mass: interval must be finite and nonempty");
    }
}

class GaussianFamily final : public BehaviorFamily {
public:
    GaussianFamily(std::function<Vec(const Vec&)> mean_fn, int action_dim, double sd)
        : mean_fn_(std::move(mean_fn)), dim_(action_dim), sd_(sd) {
        if (dim_ < 1) throw std::invalid_argument("gaussian behavior: action_dim < 1");
        if (!(sd_ > 0.0)) throw std::invalid_argument("gaussian behavior: sd must be > 0");
    }

    int action_dim() const override { return dim_; }

    double raw_density(const Vec& s, const Vec& a) const override {
        if (static_cast<int>(a.size()) != dim_)
            throw std::invalid_argument("density: action dimension mismatch");
        const Vec m = mean_fn_(s);
        double sq = 0.0;
        for (int d = 0; d < dim_; ++d) {
            const double z = (a[d] - m[d]) / sd_;
            sq += z * z;
        }
        const double norm = std::pow(2.0 * std::numbers::pi * sd_ * sd_, -0.5 * dim_);
        return norm * std::exp(-0.5 * sq);
    }

    double bin_mass(const Vec& s, const Box& bin) const override {
        check_box(bin, dim_);
        const Vec m = mean_fn_(s);
        double mass = 1.0;
        for (int d = 0; d < dim_; ++d) {
            mass *= normal_cdf((bin[d].second - m[d]) / sd_) -
                    normal_cdf((bin[d].first - m[d]) / sd_);
        }
        return mass;
    }

    Vec sample(const Vec& s, Rng& rng) const override {
        const Vec m = mean_fn_(s);
        Vec a(dim_);
        for (int d = 0; d < dim_; ++d) a[d] = rng.normal(m[d], sd_);
        return a;
    }

private:
    std::function<Vec(const Vec&)> mean_fn_;
    int dim_;
    double sd_;
};

class UniformBoxFamily final : public BehaviorFamily {
public:
    UniformBoxFamily(Vec lo, Vec hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
        if (lo_.empty() || lo_.size() != hi_.size())
            throw std::invalid_argument("uniform behavior: bounds dimension mismatch");
        volume_ = 1.0;
        for (std::size_t d = 0; d < lo_.size(); ++d) {
            if (!(lo_[d] < hi_[d]))
                throw std::invalid_argument("uniform behavior: requires lo < hi");
            volume_ *= hi_[d] - lo_[d];
        }
    }

    int action_dim() const override { return static_cast<int>(lo_.size()); }

    double raw_density(const Vec&, const Vec& a) const override {
        if (a.size() != lo_.size())
            throw std::invalid_argument("density: action dimension mismatch");
        for (std::size_t d = 0; d < lo_.size(); ++d)
            if (a[d] < lo_[d] || a[d] > hi_[d]) return 0.0;
        return 1.0 / volume_;
    }

    double bin_mass(const Vec&, const Box& bin) const override {
        check_box(bin, action_dim());
        double mass = 1.0;
        for (std::size_t d = 0; d < lo_.size(); ++d) {
            const double overlap = std::min(hi_[d], bin[d].second) -
                                   std::max(lo_[d], bin[d].first);
            if (overlap <= 0.0) return 0.0;
            mass *= overlap / (hi_[d] - lo_[d]);
        }
        return mass;
    }

    Vec sample(const Vec&, Rng& rng) const override {
        Vec a(lo_.size());
        for (std::size_t d = 0; d < lo_.size(); ++d) a[d] = rng.uniform(lo_[d], hi_[d]);
        return a;
    }

private:
    Vec lo_, hi_;
    double volume_;
};

class DosingFamily final : public BehaviorFamily {
public:
    DosingFamily(double mu, double sigma, double lo, double hi, int bmi_state_index)
        : mu_(mu), sd_(sigma * std::sqrt(0.5)), lo_(lo), hi_(hi),
          bmi_index_(bmi_state_index) {
        if (!(sd_ > 0.0)) throw std::invalid_argument("dosing behavior: sigma must be > 0");
        if (!(lo_ < hi_)) throw std::invalid_argument("dosing behavior: requires lo < hi");
        if (bmi_index_ < 0)
            throw std::invalid_argument("dosing behavior: bad bmi state index");
    }

    int action_dim() const override { return 2; }

    double raw_density(const Vec& s, const Vec& a) const override {
        if (a.size() != 2)
            throw std::invalid_argument("density: action dimension mismatch");
        const TruncatedNormal dose = dose_dist(s);
        const double d2 =
            (a[1] >= lo_ && a[1] <= hi_) ? 1.0 / (hi_ - lo_) : 0.0;
        return dose.density(a[0]) * d2;
    }

    double bin_mass(const Vec& s, const Box& bin) const override {
        check_box(bin, 2);
        const TruncatedNormal dose = dose_dist(s);
        const double m1 = dose.interval_mass(bin[0].first, bin[0].second);
        const double overlap = std::min(hi_, bin[1].second) - std::max(lo_, bin[1].first);
        const double m2 = overlap > 0.0 ? overlap / (hi_ - lo_) : 0.0;
        return m1 * m2;
    }

    Vec sample(const Vec& s, Rng& rng) const override {
        const TruncatedNormal dose = dose_dist(s);
        return {dose.sample(rng), rng.uniform(lo_, hi_)};
    }

private:
    TruncatedNormal dose_dist(const Vec& s) const {
        if (static_cast<std::size_t>(bmi_index_) >= s.size())
            throw std::invalid_argument("dosing behavior: state too short for bmi index");
        return TruncatedNormal(mu_ + sd_ * s[bmi_index_], sd_, lo_, hi_);
    }

    double mu_, sd_, lo_, hi_;
    int bmi_index_;
};

}  // namespace

BehaviorPolicy::BehaviorPolicy(std::shared_ptr<const BehaviorFamily> family,
                               double clip_floor)
    : family_(std::move(family)), clip_floor_(clip_floor) {
    if (!family_) throw std::invalid_argument("BehaviorPolicy: null family");
    if (clip_floor_ < 0.0)
        throw std::invalid_argument("BehaviorPolicy: clip_floor must be >= 0");
}

double BehaviorPolicy::raw_density(const Vec& s, const Vec& a) const {
    return family_->raw_density(s, a);
}

double BehaviorPolicy::density(const Vec& s, const Vec& a) const {
    return std::max(family_->raw_density(s, a), clip_floor_);
}

double BehaviorPolicy::density_bin_mass(const Vec& s, const Box& bin) const {
    return family_->bin_mass(s, bin);
}

Vec BehaviorPolicy::sample(const Vec& s, Rng& rng) const {
    return family_->sample(s, rng);
}

BehaviorPolicy make_gaussian_behavior(std::function<Vec(const Vec&)> mean_fn,
                                      int action_dim, double sd, double clip_floor) {
    return BehaviorPolicy(
        std::make_shared<GaussianFamily>(std::move(mean_fn), action_dim, sd), clip_floor);
}

BehaviorPolicy make_uniform_box_behavior(Vec lo, Vec hi, double clip_floor) {
    return BehaviorPolicy(std::make_shared<UniformBoxFamily>(std::move(lo), std::move(hi)),
                          clip_floor);
}

BehaviorPolicy make_dosing_behavior(double mu, double sigma, double lo, double hi,
                                    int bmi_state_index, double clip_floor) {
    return BehaviorPolicy(
        std::make_shared<DosingFamily>(mu, sigma, lo, hi, bmi_state_index), clip_floor);
}

}  // namespace kmis
