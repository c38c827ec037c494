#include "kmis/reward_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kmis/errors.hpp"
#include "kmis/parallel.hpp"
#include "kmis/rng.hpp"

namespace kmis {

namespace {

constexpr int H = MlpRewardModel::kHidden;
constexpr double kLogVarLo = -10.0;
constexpr double kLogVarHi = 10.0;
constexpr double kLog2Pi = 1.8378770664093453;  // log(2*pi)

double clamp_logvar(double lv) { return std::clamp(lv, kLogVarLo, kLogVarHi); }

// All trainable parameters laid out in one flat vector so the optimizer can
// treat them uniformly.
struct Layout {
    int in = 0;
    std::size_t w1, b1, w2, b2, w3, b3, total;

    explicit Layout(int in_dim) : in(in_dim) {
        w1 = 0;
        b1 = w1 + static_cast<std::size_t>(in) * H;
        w2 = b1 + H;
        b2 = w2 + static_cast<std::size_t>(H) * H;
        w3 = b2 + H;
        b3 = w3 + static_cast<std::size_t>(H) * 2;
        total = b3 + 2;
    }
};

struct BatchBuffers {
    std::vector<double> x, z1, m1, z2, m2, out;
    std::vector<double> dout, d2, d1;

    void resize(std::size_t b, int in) {
        x.resize(b * in);
        z1.resize(b * H);
        m1.resize(b * H);
        z2.resize(b * H);
        m2.resize(b * H);
        out.resize(b * 2);
        dout.resize(b * 2);
        d2.resize(b * H);
        d1.resize(b * H);
    }
};

// z1/z2 hold post-activation (and post-dropout) values after the pass; the
// masks already fold in the inverted-dropout scale.
void forward_batch(const double* p, const Layout& L, std::size_t b, BatchBuffers& bb,
                   bool use_mask) {
    const double* w1 = p + L.w1;
    const double* b1 = p + L.b1;
    const double* w2 = p + L.w2;
    const double* b2 = p + L.b2;
    const double* w3 = p + L.w3;
    const double* b3 = p + L.b3;

    for (std::size_t r = 0; r < b; ++r) {
        const double* xr = bb.x.data() + r * L.in;
        double* z1r = bb.z1.data() + r * H;
        for (int j = 0; j < H; ++j) z1r[j] = b1[j];
        for (int k = 0; k < L.in; ++k) {
            const double xv = xr[k];
            const double* w1k = w1 + static_cast<std::size_t>(k) * H;
            for (int j = 0; j < H; ++j) z1r[j] += xv * w1k[j];
        }
        for (int j = 0; j < H; ++j) z1r[j] = std::tanh(z1r[j]);
        if (use_mask) {
            const double* m1r = bb.m1.data() + r * H;
            for (int j = 0; j < H; ++j) z1r[j] *= m1r[j];
        }

        double* z2r = bb.z2.data() + r * H;
        for (int j = 0; j < H; ++j) z2r[j] = b2[j];
        for (int k = 0; k < H; ++k) {
            const double av = z1r[k];
            const double* w2k = w2 + static_cast<std::size_t>(k) * H;
            for (int j = 0; j < H; ++j) z2r[j] += av * w2k[j];
        }
        for (int j = 0; j < H; ++j) z2r[j] = std::tanh(z2r[j]);
        if (use_mask) {
            const double* m2r = bb.m2.data() + r * H;
            for (int j = 0; j < H; ++j) z2r[j] *= m2r[j];
        }

        double* outr = bb.out.data() + r * 2;
        outr[0] = b3[0];
        outr[1] = b3[1];
        for (int k = 0; k < H; ++k) {
            outr[0] += z2r[k] * w3[static_cast<std::size_t>(k) * 2];
            outr[1] += z2r[k] * w3[static_cast<std::size_t>(k) * 2 + 1];
        }
    }
}

}  // namespace

void MlpRewardModel::standardize(std::span<const double> s, std::span<const double> a,
                                 double* out) const {
    if (static_cast<int>(s.size()) != state_dim_ || static_cast<int>(a.size()) != action_dim_)
        throw std::invalid_argument("reward model: input dimension mismatch");
    for (int d = 0; d < state_dim_; ++d)
        out[d] = (s[d] - input_mean_[d]) / input_sd_[d];
    for (int d = 0; d < action_dim_; ++d) {
        const int k = state_dim_ + d;
        out[k] = (a[d] - input_mean_[k]) / input_sd_[k];
    }
}

std::pair<double, double> MlpRewardModel::forward_std(const double* x) const {
    double h1[H], h2[H];
    for (int j = 0; j < H; ++j) h1[j] = b1_[j];
    for (int k = 0; k < in_dim_; ++k) {
        const double xv = x[k];
        const double* w1k = w1_.data() + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) h1[j] += xv * w1k[j];
    }
    for (int j = 0; j < H; ++j) h1[j] = std::tanh(h1[j]);

    for (int j = 0; j < H; ++j) h2[j] = b2_[j];
    for (int k = 0; k < H; ++k) {
        const double av = h1[k];
        const double* w2k = w2_.data() + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) h2[j] += av * w2k[j];
    }
    for (int j = 0; j < H; ++j) h2[j] = std::tanh(h2[j]);

    double mean = b3_[0], logvar = b3_[1];
    for (int k = 0; k < H; ++k) {
        mean += h2[k] * w3_[static_cast<std::size_t>(k) * 2];
        logvar += h2[k] * w3_[static_cast<std::size_t>(k) * 2 + 1];
    }
    return {mean, clamp_logvar(logvar)};
}

double MlpRewardModel::predict_mean(std::span<const double> s,
                                    std::span<const double> a) const {
    if (in_dim_ == 0) throw std::logic_error("reward model: not fitted");
    std::vector<double> x(in_dim_);
    standardize(s, a, x.data());
    return reward_mean_ + reward_sd_ * forward_std(x.data()).first;
}

double MlpRewardModel::predict_second_moment(std::span<const double> s,
                                             std::span<const double> a) const {
    if (in_dim_ == 0) throw std::logic_error("reward model: not fitted");
    std::vector<double> x(in_dim_);
    standardize(s, a, x.data());
    auto [mean, logvar] = forward_std(x.data());
    const double m = reward_mean_ + reward_sd_ * mean;
    const double var = reward_sd_ * reward_sd_ * std::exp(logvar);
    return m * m + var;
}

Vec MlpRewardModel::input_gradient(std::span<const double> s,
                                   std::span<const double> a) const {
    if (in_dim_ == 0) throw std::logic_error("reward model: not fitted");
    std::vector<double> x(in_dim_);
    standardize(s, a, x.data());

    double h1[H], h2[H];
    for (int j = 0; j < H; ++j) h1[j] = b1_[j];
    for (int k = 0; k < in_dim_; ++k) {
        const double xv = x[k];
        const double* w1k = w1_.data() + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) h1[j] += xv * w1k[j];
    }
    for (int j = 0; j < H; ++j) h1[j] = std::tanh(h1[j]);
    for (int j = 0; j < H; ++j) h2[j] = b2_[j];
    for (int k = 0; k < H; ++k) {
        const double av = h1[k];
        const double* w2k = w2_.data() + static_cast<std::size_t>(k) * H;
        for (int j = 0; j < H; ++j) h2[j] += av * w2k[j];
    }
    for (int j = 0; j < H; ++j) h2[j] = std::tanh(h2[j]);

    double d2[H], d1[H];
    for (int j = 0; j < H; ++j) {
        const double da = w3_[static_cast<std::size_t>(j) * 2];
        d2[j] = da * (1.0 - h2[j] * h2[j]);
    }
    for (int k = 0; k < H; ++k) {
        const double* w2k = w2_.data() + static_cast<std::size_t>(k) * H;
        double acc = 0.0;
        for (int j = 0; j < H; ++j) acc += d2[j] * w2k[j];
        d1[k] = acc * (1.0 - h1[k] * h1[k]);
    }
    Vec grad(in_dim_);
    for (int k = 0; k < in_dim_; ++k) {
        const double* w1k = w1_.data() + static_cast<std::size_t>(k) * H;
        double acc = 0.0;
        for (int j = 0; j < H; ++j) acc += d1[j] * w1k[j];
        grad[k] = acc * reward_sd_ / input_sd_[k];
    }
    return grad;
}

std::pair<MlpRewardModel, FitReport> fit_reward_model(const LoggedDataset& data,
                                                      const RewardModelConfig& config,
                                                      std::uint64_t seed) {
    data.validate();
    const std::size_t n = data.size();
    if (n < 10) throw std::invalid_argument("fit_reward_model: need at least 10 rows");
    if (!(config.dropout >= 0.0 && config.dropout < 1.0))
        throw std::invalid_argument("fit_reward_model: dropout must be in [0,1)");

    const int in_dim = data.state_dim + data.action_dim;
    const Layout L(in_dim);

    Rng rng(seed);

    // Split: shuffled indices, first part train, rest validation.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    std::size_t n_val = static_cast<std::size_t>(
        std::llround(config.validation_fraction * static_cast<double>(n)));
    n_val = std::clamp<std::size_t>(n_val, 1, n - 1);
    const std::size_t n_train = n - n_val;
    std::vector<std::size_t> train_idx(idx.begin(), idx.begin() + n_train);
    const std::vector<std::size_t> val_idx(idx.begin() + n_train, idx.end());

    // Standardization statistics from the training split only.
    Vec mu(in_dim, 0.0), sd(in_dim, 0.0);
    auto raw_input = [&](std::size_t i, int k) {
        return k < data.state_dim ? data.state(i)[k] : data.action(i)[k - data.state_dim];
    };
    for (std::size_t i : train_idx)
        for (int k = 0; k < in_dim; ++k) mu[k] += raw_input(i, k);
    for (int k = 0; k < in_dim; ++k) mu[k] /= static_cast<double>(n_train);
    for (std::size_t i : train_idx)
        for (int k = 0; k < in_dim; ++k) {
            const double d = raw_input(i, k) - mu[k];
            sd[k] += d * d;
        }
    for (int k = 0; k < in_dim; ++k) {
        sd[k] = std::sqrt(sd[k] / static_cast<double>(n_train));
        if (!(sd[k] > 1e-12)) sd[k] = 1.0;
    }

    // Targets standardized as well: with raw rewards spanning tens of units,
    // an initially unit-variance Gaussian head inflates its variance to cover
    // the residual, which scales mean gradients by 1/var and stalls training.
    double r_mu = 0.0, r_sd = 0.0;
    for (std::size_t i : train_idx) r_mu += data.rewards[i];
    r_mu /= static_cast<double>(n_train);
    for (std::size_t i : train_idx) {
        const double d = data.rewards[i] - r_mu;
        r_sd += d * d;
    }
    r_sd = std::sqrt(r_sd / static_cast<double>(n_train));
    if (!(r_sd > 1e-12)) r_sd = 1.0;
    const double log_r_sd = std::log(r_sd);

    // Pre-standardized design matrix and targets.
    std::vector<double> X(n * static_cast<std::size_t>(in_dim));
    Vec RZ(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < in_dim; ++k)
            X[i * in_dim + k] = (raw_input(i, k) - mu[k]) / sd[k];
        RZ[i] = (data.rewards[i] - r_mu) / r_sd;
    }

    // Glorot-uniform weights, zero biases.
    std::vector<double> params(L.total, 0.0);
    auto init_layer = [&](std::size_t off, int fan_in, int fan_out) {
        const double lim = std::sqrt(6.0 / (fan_in + fan_out));
        for (std::size_t i = 0; i < static_cast<std::size_t>(fan_in) * fan_out; ++i)
            params[off + i] = rng.uniform(-lim, lim);
    };
    init_layer(L.w1, in_dim, H);
    init_layer(L.w2, H, H);
    init_layer(L.w3, H, 2);
    // Zero the log-variance column so the initial predicted variance is
    // exactly 1 on the standardized scale rather than a random function of
    // the input, which would reweight per-sample mean gradients by exp(-lv).
    for (int j = 0; j < H; ++j) params[L.w3 + static_cast<std::size_t>(j) * 2 + 1] = 0.0;

    std::vector<double> grads(L.total), adam_m(L.total, 0.0), adam_v(L.total, 0.0);
    const std::size_t B = static_cast<std::size_t>(config.batch_size);
    BatchBuffers bb;
    bb.resize(B, in_dim);

    auto validation_nll = [&]() {
        double total = 0.0;
        std::size_t done = 0;
        while (done < val_idx.size()) {
            const std::size_t b = std::min(B, val_idx.size() - done);
            for (std::size_t r = 0; r < b; ++r) {
                const double* src = X.data() + val_idx[done + r] * in_dim;
                std::copy(src, src + in_dim, bb.x.data() + r * in_dim);
            }
            forward_batch(params.data(), L, b, bb, false);
            for (std::size_t r = 0; r < b; ++r) {
                const double mean = bb.out[r * 2];
                const double lv = clamp_logvar(bb.out[r * 2 + 1]);
                const double res = RZ[val_idx[done + r]] - mean;
                total += 0.5 * (kLog2Pi + lv + res * res * std::exp(-lv));
            }
            done += b;
        }
        // + log(reward sd) converts the density back to the raw scale.
        return total / static_cast<double>(val_idx.size()) + log_r_sd;
    };

    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
    double b1t = 1.0, b2t = 1.0;
    // Two-phase optimization of the NLL. Joint training lets the variance
    // head inflate wherever the mean is still wrong, and the resulting
    // 1/var factor stalls the mean exactly there; so first train the mean
    // alone (variance frozen at 1, making the NLL an affine function of the
    // MSE), and only once validation stops improving unfreeze the variance
    // head to calibrate. Same objective, better minimum.
    bool mean_phase = true;

    const double epoch0_val = validation_nll();
    double best_val = epoch0_val;
    std::vector<double> best_params = params;
    int bad_epochs = 0, epochs_run = 0;
    const double keep = 1.0 - config.dropout;

    for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        for (std::size_t start = 0; start < n_train; start += B) {
            const std::size_t b = std::min(B, n_train - start);
            for (std::size_t r = 0; r < b; ++r) {
                const double* src = X.data() + train_idx[start + r] * in_dim;
                std::copy(src, src + in_dim, bb.x.data() + r * in_dim);
            }
            if (config.dropout > 0.0) {
                for (std::size_t i = 0; i < b * H; ++i)
                    bb.m1[i] = rng.uniform() < config.dropout ? 0.0 : 1.0 / keep;
                for (std::size_t i = 0; i < b * H; ++i)
                    bb.m2[i] = rng.uniform() < config.dropout ? 0.0 : 1.0 / keep;
            } else {
                std::fill(bb.m1.begin(), bb.m1.begin() + b * H, 1.0);
                std::fill(bb.m2.begin(), bb.m2.begin() + b * H, 1.0);
            }
            forward_batch(params.data(), L, b, bb, true);

            // Head gradients of the mean NLL over the batch.
            double batch_loss = 0.0;
            const double inv_b = 1.0 / static_cast<double>(b);
            for (std::size_t r = 0; r < b; ++r) {
                const double mean = bb.out[r * 2];
                const double raw_lv = bb.out[r * 2 + 1];
                const double lv = clamp_logvar(raw_lv);
                const double res = RZ[train_idx[start + r]] - mean;
                const double inv_var = std::exp(-lv);
                batch_loss += 0.5 * (kLog2Pi + lv + res * res * inv_var);
                bb.dout[r * 2] = -res * inv_var * inv_b;
                const bool clipped = raw_lv < kLogVarLo || raw_lv > kLogVarHi;
                bb.dout[r * 2 + 1] =
                    clipped || mean_phase ? 0.0
                                          : 0.5 * (1.0 - res * res * inv_var) * inv_b;
            }
            if (!std::isfinite(batch_loss))
                throw TrainingDivergedError("fit_reward_model: non-finite loss", epoch);

            std::fill(grads.begin(), grads.end(), 0.0);
            double* gw1 = grads.data() + L.w1;
            double* gb1 = grads.data() + L.b1;
            double* gw2 = grads.data() + L.w2;
            double* gb2 = grads.data() + L.b2;
            double* gw3 = grads.data() + L.w3;
            double* gb3 = grads.data() + L.b3;
            const double* w2 = params.data() + L.w2;
            const double* w3 = params.data() + L.w3;

            for (std::size_t r = 0; r < b; ++r) {
                const double* a2 = bb.z2.data() + r * H;  // post-dropout activations
                const double* a1 = bb.z1.data() + r * H;
                const double* xr = bb.x.data() + r * in_dim;
                const double g0 = bb.dout[r * 2], g1 = bb.dout[r * 2 + 1];
                gb3[0] += g0;
                gb3[1] += g1;
                double* d2 = bb.d2.data() + r * H;
                const double* m2r = bb.m2.data() + r * H;
                for (int j = 0; j < H; ++j) {
                    gw3[static_cast<std::size_t>(j) * 2] += a2[j] * g0;
                    gw3[static_cast<std::size_t>(j) * 2 + 1] += a2[j] * g1;
                    // a2 holds tanh*mask; recover tanh' = 1 - tanh^2 via mask.
                    const double da2d = g0 * w3[static_cast<std::size_t>(j) * 2] +
                                        g1 * w3[static_cast<std::size_t>(j) * 2 + 1];
                    const double mask = m2r[j];
                    const double t = mask != 0.0 ? a2[j] / mask : 0.0;
                    d2[j] = da2d * mask * (1.0 - t * t);
                }
                const double* m1r = bb.m1.data() + r * H;
                double* d1 = bb.d1.data() + r * H;
                for (int k = 0; k < H; ++k) {
                    const double* w2k = w2 + static_cast<std::size_t>(k) * H;
                    double acc = 0.0;
                    for (int j = 0; j < H; ++j) acc += d2[j] * w2k[j];
                    const double mask = m1r[k];
                    const double t = mask != 0.0 ? a1[k] / mask : 0.0;
                    d1[k] = acc * mask * (1.0 - t * t);
                }
                for (int k = 0; k < H; ++k) {
                    const double av = a1[k];
                    if (av != 0.0) {
                        double* gw2k = gw2 + static_cast<std::size_t>(k) * H;
                        for (int j = 0; j < H; ++j) gw2k[j] += av * d2[j];
                    }
                    gb2[k] += d2[k];
                }
                for (int k = 0; k < in_dim; ++k) {
                    const double xv = xr[k];
                    double* gw1k = gw1 + static_cast<std::size_t>(k) * H;
                    for (int j = 0; j < H; ++j) gw1k[j] += xv * d1[j];
                }
                for (int j = 0; j < H; ++j) gb1[j] += d1[j];
            }

            if (config.l2 > 0.0) {
                for (std::size_t i = L.w1; i < L.b1; ++i) grads[i] += config.l2 * params[i];
                for (std::size_t i = L.w2; i < L.b2; ++i) grads[i] += config.l2 * params[i];
                for (std::size_t i = L.w3; i < L.b3; ++i) grads[i] += config.l2 * params[i];
            }

            b1t *= beta1;
            b2t *= beta2;
            const double corr1 = 1.0 / (1.0 - b1t), corr2 = 1.0 / (1.0 - b2t);
            for (std::size_t i = 0; i < L.total; ++i) {
                const double g = grads[i];
                adam_m[i] = beta1 * adam_m[i] + (1.0 - beta1) * g;
                adam_v[i] = beta2 * adam_v[i] + (1.0 - beta2) * g * g;
                params[i] -= config.learning_rate * (adam_m[i] * corr1) /
                             (std::sqrt(adam_v[i] * corr2) + adam_eps);
            }
        }

        const double val = validation_nll();
        if (!std::isfinite(val))
            throw TrainingDivergedError("fit_reward_model: non-finite validation loss",
                                        epoch);
        epochs_run = epoch;
        if (val < best_val) {
            best_val = val;
            best_params = params;
            bad_epochs = 0;
        } else if (++bad_epochs >= config.patience) {
            if (!mean_phase) break;
            mean_phase = false;
            params = best_params;
            bad_epochs = 0;
        }
    }

    MlpRewardModel model;
    model.state_dim_ = data.state_dim;
    model.action_dim_ = data.action_dim;
    model.in_dim_ = in_dim;
    model.input_mean_ = std::move(mu);
    model.input_sd_ = std::move(sd);
    model.reward_mean_ = r_mu;
    model.reward_sd_ = r_sd;
    model.config_ = config;
    const double* p = best_params.data();
    model.w1_.assign(p + L.w1, p + L.b1);
    model.b1_.assign(p + L.b1, p + L.w2);
    model.w2_.assign(p + L.w2, p + L.b2);
    model.b2_.assign(p + L.b2, p + L.w3);
    model.w3_.assign(p + L.w3, p + L.b3);
    model.b3_.assign(p + L.b3, p + L.total);

    FitReport report;
    report.epochs_run = epochs_run;
    report.best_validation_nll = best_val;
    report.epoch0_validation_nll = epoch0_val;
    report.n_train = n_train;
    report.n_validation = n_val;
    report.seed = seed;
    return {std::move(model), report};
}

SymMatrix hessian_at(const RewardModel& model, std::span<const double> s,
                     std::span<const double> a) {
    const int d = model.action_dim();
    if (static_cast<int>(a.size()) != d)
        throw std::invalid_argument("hessian_at: action dimension mismatch");
    Vec step(d);
    for (int k = 0; k < d; ++k) step[k] = 1e-3 * (1.0 + std::abs(a[k]));

    Vec pt(a.begin(), a.end());
    auto eval = [&](Vec& x) { return model.predict_mean(s, x); };

    const double f0 = eval(pt);
    SymMatrix hess(d);
    for (int k = 0; k < d; ++k) {
        Vec x = pt;
        x[k] = pt[k] + step[k];
        const double fp = eval(x);
        x[k] = pt[k] - step[k];
        const double fm = eval(x);
        const double second = (fp - 2.0 * f0 + fm) / (step[k] * step[k]);
        if (!std::isfinite(second))
            throw InternalConsistencyError("hessian_at: non-finite second difference at (" +
                                           std::to_string(k) + "," + std::to_string(k) + ")");
        hess.set(k, k, second);
    }
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            Vec x = pt;
            x[j] = pt[j] + step[j];
            x[k] = pt[k] + step[k];
            const double fpp = eval(x);
            x[k] = pt[k] - step[k];
            const double fpm = eval(x);
            x[j] = pt[j] - step[j];
            x[k] = pt[k] + step[k];
            const double fmp = eval(x);
            x[k] = pt[k] - step[k];
            const double fmm = eval(x);
            const double mixed = (fpp - fpm - fmp + fmm) / (4.0 * step[j] * step[k]);
            if (!std::isfinite(mixed))
                throw InternalConsistencyError(
                    "hessian_at: non-finite second difference at (" + std::to_string(j) +
                    "," + std::to_string(k) + ")");
            hess.set(j, k, mixed);
        }
    }
    return hess;
}

double dm_estimate(const RewardModel& model, const LoggedDataset& data,
                   const TargetPolicy& target) {
    const std::size_t n = data.size();
    if (n == 0) throw std::invalid_argument("dm_estimate: empty dataset");
    Vec terms(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec s = data.state_vec(i);
        const Vec a = target(s);
        terms[i] = model.predict_mean(s, a);
    }
    return stable_sum(terms) / static_cast<double>(n);
}

std::string MlpRewardModel::to_json() const {
    nlohmann::json j;
    j["format"] = "kmis-reward-model";
    j["version"] = 1;
    j["state_dim"] = state_dim_;
    j["action_dim"] = action_dim_;
    j["input_mean"] = input_mean_;
    j["input_sd"] = input_sd_;
    j["reward_mean"] = reward_mean_;
    j["reward_sd"] = reward_sd_;
    j["w1"] = w1_;
    j["b1"] = b1_;
    j["w2"] = w2_;
    j["b2"] = b2_;
    j["w3"] = w3_;
    j["b3"] = b3_;
    j["config"] = {{"learning_rate", config_.learning_rate},
                   {"batch_size", config_.batch_size},
                   {"max_epochs", config_.max_epochs},
                   {"patience", config_.patience},
                   {"validation_fraction", config_.validation_fraction},
                   {"dropout", config_.dropout},
                   {"l2", config_.l2}};
    return j.dump();
}

MlpRewardModel MlpRewardModel::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.value("format", "") != "kmis-reward-model")
        throw std::runtime_error("model blob: unrecognized format");
    if (j.value("version", 0) != 1)
        throw std::runtime_error("model blob: unsupported version");
    MlpRewardModel m;
    m.state_dim_ = j.at("state_dim").get<int>();
    m.action_dim_ = j.at("action_dim").get<int>();
    m.in_dim_ = m.state_dim_ + m.action_dim_;
    m.input_mean_ = j.at("input_mean").get<Vec>();
    m.input_sd_ = j.at("input_sd").get<Vec>();
    m.reward_mean_ = j.at("reward_mean").get<double>();
    m.reward_sd_ = j.at("reward_sd").get<double>();
    m.w1_ = j.at("w1").get<Vec>();
    m.b1_ = j.at("b1").get<Vec>();
    m.w2_ = j.at("w2").get<Vec>();
    m.b2_ = j.at("b2").get<Vec>();
    m.w3_ = j.at("w3").get<Vec>();
    m.b3_ = j.at("b3").get<Vec>();
    const auto& c = j.at("config");
    m.config_.learning_rate = c.at("learning_rate").get<double>();
    m.config_.batch_size = c.at("batch_size").get<int>();
    m.config_.max_epochs = c.at("max_epochs").get<int>();
    m.config_.patience = c.at("patience").get<int>();
    m.config_.validation_fraction = c.at("validation_fraction").get<double>();
    m.config_.dropout = c.at("dropout").get<double>();
    m.config_.l2 = c.at("l2").get<double>();

    const auto expect = [&](const Vec& v, std::size_t want, const char* name) {
        if (v.size() != want)
            throw std::runtime_error(std::string("model blob: bad size for ") + name);
    };
    expect(m.input_mean_, m.in_dim_, "input_mean");
    expect(m.input_sd_, m.in_dim_, "input_sd");
    expect(m.w1_, static_cast<std::size_t>(m.in_dim_) * H, "w1");
    expect(m.b1_, H, "b1");
    expect(m.w2_, static_cast<std::size_t>(H) * H, "w2");
    expect(m.b2_, H, "b2");
    expect(m.w3_, static_cast<std::size_t>(H) * 2, "w3");
    expect(m.b3_, 2, "b3");
    return m;
}

void save_model(const MlpRewardModel& model, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << model.to_json();
    if (!f) throw std::runtime_error("write failed: " + path);
}

MlpRewardModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return MlpRewardModel::from_json(ss.str());
}

}  // namespace kmis
