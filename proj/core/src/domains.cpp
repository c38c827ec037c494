#include "kmis/domains.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "kmis/parallel.hpp"

namespace kmis {

namespace {

Vec uniform_state(Rng& rng, int dim) {
    Vec s(dim);
    for (int d = 0; d < dim; ++d) s[d] = rng.uniform(-1.0, 1.0);
    return s;
}

}  // namespace

SyntheticDomain make_quadratic(double noise_sd) {
    if (noise_sd < 0.0)
        throw std::invalid_argument("make_quadratic: noise_sd must be >= 0");
    SyntheticDomain d;
    d.name = "quadratic";
    d.state_dim = 2;
    d.action_dim = 2;
    d.sample_state = [](Rng& rng) { return uniform_state(rng, 2); };
    d.behavior = make_gaussian_behavior(
        [](const Vec& s) {
            return Vec{s[0] + 0.2, s[1] + 0.2};
        },
        2, 0.5, 0.1);
    d.target = TargetPolicy{2, [](const Vec& s) { return s; }};
    d.mean_reward = [](const Vec& s, const Vec& a) {
        const double d1 = s[0] - a[0];
        const double d2 = s[1] - a[1];
        return -(11.0 * d1 * d1 + 18.0 * d1 * d2 + 11.0 * d2 * d2);
    };
    d.noise_sd = noise_sd;
    d.true_value = 0.0;
    return d;
}

SyntheticDomain make_abs_error(int extra_dummy_dims) {
    if (extra_dummy_dims < 0)
        throw std::invalid_argument("make_abs_error: extra_dummy_dims must be >= 0");
    const int dim = 2 + extra_dummy_dims;
    SyntheticDomain d;
    d.name = "abs_error";
    d.state_dim = dim;
    d.action_dim = dim;
    d.sample_state = [dim](Rng& rng) { return uniform_state(rng, dim); };
    d.behavior = make_uniform_box_behavior(Vec(dim, -1.0), Vec(dim, 1.0), 0.0);
    d.target = TargetPolicy{dim, [](const Vec& s) {
                                Vec a(s.size());
                                for (std::size_t i = 0; i < s.size(); ++i) a[i] = 0.5 * s[i];
                                return a;
                            }};
    d.mean_reward = [](const Vec& s, const Vec& a) {
        return -std::abs(0.5 * s[0] - a[0]);
    };
    d.noise_sd = 0.0;
    d.true_value = 0.0;
    return d;
}

SyntheticDomain make_multimodal() {
    SyntheticDomain d;
    d.name = "multimodal";
    d.state_dim = 2;
    d.action_dim = 2;
    d.sample_state = [](Rng& rng) { return uniform_state(rng, 2); };
    d.behavior = make_uniform_box_behavior(Vec(2, -1.0), Vec(2, 1.0), 0.0);
    d.target = TargetPolicy{2, [](const Vec& s) {
                                return Vec{s[0] + 0.5, s[1]};
                            }};
    d.mean_reward = [](const Vec& s, const Vec& a) {
        const double x = s[0] - a[0];
        const double y = s[1] - a[1];
        const auto sq = [](double v) { return v * v; };
        const double f1 = std::exp(-(sq((x - 0.5) / 0.25) + sq(y)));
        const double f2 = std::exp(-(sq((x + 0.5) / 0.25) + sq(y)));
        const double f3 = std::exp(-(sq(x) + sq((y + 0.5) / 0.25)));
        const double f4 = std::exp(-(sq(x) + sq((y - 0.5) / 0.25)));
        return -std::max({f1, f2, f3, f4});
    };
    d.noise_sd = 0.0;
    d.true_value = -1.0;
    return d;
}

McEstimate true_value_mc_detail(const SyntheticDomain& domain, std::size_t n_states,
                                std::uint64_t seed) {
    if (n_states < 1)
        throw std::invalid_argument("true_value_mc: n_states must be >= 1");
    Rng rng(seed);
    Vec vals(n_states);
    for (std::size_t i = 0; i < n_states; ++i) {
        const Vec s = domain.sample_state(rng);
        vals[i] = domain.mean_reward(s, domain.target(s));
    }
    McEstimate out;
    out.mean = stable_sum(vals) / static_cast<double>(n_states);
    Vec dev(n_states);
    for (std::size_t i = 0; i < n_states; ++i) {
        const double d = vals[i] - out.mean;
        dev[i] = d * d;
    }
    const double var = stable_sum(dev) / static_cast<double>(n_states);
    out.std_error = std::sqrt(var / static_cast<double>(n_states));
    return out;
}

double true_value_mc(const SyntheticDomain& domain, std::size_t n_states,
                     std::uint64_t seed) {
    return true_value_mc_detail(domain, n_states, seed).mean;
}

OracleRewardModel oracle_model(const SyntheticDomain& domain) {
    auto mean = domain.mean_reward;
    return OracleRewardModel(
        domain.state_dim, domain.action_dim,
        [mean](std::span<const double> s, std::span<const double> a) {
            return mean(Vec(s.begin(), s.end()), Vec(a.begin(), a.end()));
        },
        domain.noise_sd * domain.noise_sd);
}

LoggedDataset generate_dataset(const SyntheticDomain& domain, std::size_t n,
                               std::uint64_t seed) {
    return generate_dataset(domain, domain.behavior, n, seed);
}

LoggedDataset generate_dataset(const SyntheticDomain& domain,
                               const BehaviorPolicy& behavior, std::size_t n,
                               std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
    Rng rng(seed);
    LoggedDataset ds;
    ds.state_dim = domain.state_dim;
    ds.action_dim = behavior.action_dim();
    ds.states.reserve(n * domain.state_dim);
    ds.actions.reserve(n * ds.action_dim);
    ds.rewards.reserve(n);
    ds.behavior_density.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec s = domain.sample_state(rng);
        const Vec a = behavior.sample(s, rng);
        double r = domain.mean_reward(s, a);
        if (domain.noise_sd > 0.0) r += rng.normal(0.0, domain.noise_sd);
        ds.states.insert(ds.states.end(), s.begin(), s.end());
        ds.actions.insert(ds.actions.end(), a.begin(), a.end());
        ds.rewards.push_back(r);
        ds.behavior_density.push_back(behavior.density(s, a));
    }
    ds.validate();
    return ds;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

void finalize_dose_stats(WarfarinTable& t, const std::string& origin) {
    const std::size_t n = t.size();
    if (n == 0) throw std::runtime_error(origin + ": no patients");
    t.dose_lo = *std::min_element(t.dose.begin(), t.dose.end());
    t.dose_hi = *std::max_element(t.dose.begin(), t.dose.end());
    if (!(t.dose_lo < t.dose_hi))
        throw std::runtime_error(origin + ": dose column is degenerate (lo >= hi)");
    double sum = 0.0;
    for (double x : t.dose) sum += x;
    t.mu = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double x : t.dose) ss += (x - t.mu) * (x - t.mu);
    t.sigma = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
    if (!(t.sigma > 0.0))
        throw std::runtime_error(origin + ": dose column has zero spread");
}

}  // namespace

WarfarinTable warfarin_load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty file: " + path);

    const auto header = split_line(line);
    const std::size_t want = WarfarinTable::kFeatures + 2;
    if (header.size() != want)
        throw std::runtime_error(path + ": expected " + std::to_string(want) +
                                 " columns f_1..f_81,dose,bmi_z");
    for (int i = 0; i < WarfarinTable::kFeatures; ++i) {
        const std::string expect = "f_" + std::to_string(i + 1);
        if (header[i] != expect)
            throw std::runtime_error(path + ": bad column '" + header[i] + "', want '" +
                                     expect + "'");
    }
    if (header[WarfarinTable::kFeatures] != "dose")
        throw std::runtime_error(path + ": bad column '" + header[WarfarinTable::kFeatures] +
                                 "', want 'dose'");
    if (header[WarfarinTable::kFeatures + 1] != "bmi_z")
        throw std::runtime_error(path + ": bad column '" +
                                 header[WarfarinTable::kFeatures + 1] + "', want 'bmi_z'");

    WarfarinTable t;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = split_line(line);
        if (cells.size() != want)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": wrong field count");
        try {
            for (int i = 0; i < WarfarinTable::kFeatures; ++i)
                t.features.push_back(parse_double(cells[i]));
            t.dose.push_back(parse_double(cells[WarfarinTable::kFeatures]));
            t.bmi_z.push_back(parse_double(cells[WarfarinTable::kFeatures + 1]));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!std::isfinite(t.dose.back()) || t.dose.back() <= 0.0)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": column 'dose' must be a positive number");
    }
    finalize_dose_stats(t, path);
    return t;
}

void warfarin_save(const WarfarinTable& table, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    for (int i = 1; i <= WarfarinTable::kFeatures; ++i) f << "f_" << i << ",";
    f << "dose,bmi_z\n";
    const std::size_t n = table.size();
    for (std::size_t r = 0; r < n; ++r) {
        for (int i = 0; i < WarfarinTable::kFeatures; ++i)
            f << format_double(table.features[r * WarfarinTable::kFeatures + i]) << ",";
        f << format_double(table.dose[r]) << "," << format_double(table.bmi_z[r]) << "\n";
    }
    if (!f) throw std::runtime_error("write failed: " + path);
}

WarfarinTable warfarin_synthetic(std::size_t n_patients, std::uint64_t seed) {
    if (n_patients < 1)
        throw std::invalid_argument("warfarin_synthetic: n_patients must be >= 1");
    Rng rng(seed);
    WarfarinTable t;
    t.features.reserve(n_patients * WarfarinTable::kFeatures);
    t.dose.reserve(n_patients);
    t.bmi_z.reserve(n_patients);
    for (std::size_t i = 0; i < n_patients; ++i) {
        for (int k = 0; k < WarfarinTable::kFeatures; ++k)
            t.features.push_back(rng.normal());
        // Weekly-dose-like scale: log-normal around 35, clamped to [5, 100].
        const double dose = std::clamp(std::exp(rng.normal(std::log(35.0), 0.4)), 5.0, 100.0);
        t.dose.push_back(dose);
        t.bmi_z.push_back(rng.normal());
    }
    finalize_dose_stats(t, "warfarin_synthetic");
    return t;
}

BehaviorPolicy warfarin_behavior(const WarfarinTable& table) {
    const int bmi_index = WarfarinTable::kFeatures;  // appended after features
    return make_dosing_behavior(table.mu, table.sigma, table.dose_lo, table.dose_hi,
                                bmi_index, 0.1);
}

TargetPolicy warfarin_target(int state_dim) {
    if (state_dim < 1) throw std::invalid_argument("warfarin_target: bad state dim");
    return TargetPolicy{2, [state_dim](const Vec& s) {
                            return Vec{s[static_cast<std::size_t>(state_dim) - 1], 0.0};
                        }};
}

LoggedDataset warfarin_make_logged(const WarfarinTable& table, std::uint64_t seed,
                                   std::size_t n_rows) {
    const std::size_t n_pat = table.size();
    if (n_pat == 0) throw std::invalid_argument("warfarin_make_logged: empty table");
    const BehaviorPolicy behavior = warfarin_behavior(table);
    Rng rng(seed);

    const std::size_t n = n_rows == 0 ? n_pat : n_rows;
    const int sd = WarfarinTable::kFeatures + 1;
    LoggedDataset ds;
    ds.state_dim = sd;
    ds.action_dim = 2;
    ds.states.reserve(n * sd);
    ds.actions.reserve(n * 2);
    ds.rewards.reserve(n);
    ds.behavior_density.reserve(n);

    for (std::size_t row = 0; row < n; ++row) {
        const std::size_t p =
            n_rows == 0 ? row : static_cast<std::size_t>(rng.uniform_int(n_pat));
        Vec s(table.features.begin() + p * WarfarinTable::kFeatures,
              table.features.begin() + (p + 1) * WarfarinTable::kFeatures);
        s.push_back(table.bmi_z[p]);
        const Vec a = behavior.sample(s, rng);
        const double star = table.dose[p];
        const double r = -std::max(std::abs(a[0] - star) - 0.1 * star, 0.0);
        ds.states.insert(ds.states.end(), s.begin(), s.end());
        ds.actions.insert(ds.actions.end(), a.begin(), a.end());
        ds.rewards.push_back(r);
        ds.behavior_density.push_back(behavior.density(s, a));
    }
    ds.validate();
    return ds;
}

}  // namespace kmis
