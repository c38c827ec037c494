#include "kmis/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "kmis/errors.hpp"
#include "kmis/parallel.hpp"

namespace kmis {

namespace {

constexpr std::uint64_t kFitSeedSalt = 0xf17a5eedf17a5eedull;

const std::vector<std::string> kEstimatorIds = {"dm", "kis", "kmis", "disc"};
const std::vector<std::string> kSweepKinds = {"none", "n", "bandwidth", "dummy_dims",
                                              "noise_sd"};

bool contains(const std::vector<std::string>& xs, const std::string& x) {
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

struct BuiltDomain {
    bool is_warfarin = false;
    SyntheticDomain synthetic;
    WarfarinTable table;
    BehaviorPolicy behavior;
    TargetPolicy target;
    double true_value = 0.0;
    double default_dropout = 0.5;
    double default_l2 = 0.0;

    LoggedDataset make_dataset(std::size_t n, std::uint64_t seed) const {
        if (is_warfarin) return warfarin_make_logged(table, seed, n);
        return generate_dataset(synthetic, n, seed);
    }
};

double warfarin_true_value(const WarfarinTable& t) {
    const std::size_t n = t.size();
    Vec vals(n);
    for (std::size_t p = 0; p < n; ++p) {
        const double star = t.dose[p];
        const double a1 = t.bmi_z[p];
        vals[p] = -std::max(std::abs(a1 - star) - 0.1 * star, 0.0);
    }
    return stable_sum(vals) / static_cast<double>(n);
}

/// sweep_value only matters for the kinds that reshape the domain itself.
BuiltDomain build_domain(const ExperimentConfig& cfg, double sweep_value) {
    BuiltDomain bd;
    if (cfg.domain == "quadratic") {
        const double noise =
            cfg.sweep_kind == "noise_sd" ? sweep_value : cfg.noise_sd;
        bd.synthetic = make_quadratic(noise);
    } else if (cfg.domain == "abs_error") {
        const int extra = cfg.sweep_kind == "dummy_dims"
                              ? static_cast<int>(std::llround(sweep_value))
                              : cfg.dummy_dims;
        bd.synthetic = make_abs_error(extra);
    } else if (cfg.domain == "multimodal") {
        bd.synthetic = make_multimodal();
    } else if (cfg.domain == "warfarin") {
        bd.is_warfarin = true;
        bd.table = cfg.warfarin_csv.empty()
                       ? warfarin_synthetic(cfg.warfarin_patients, cfg.warfarin_table_seed)
                       : warfarin_load(cfg.warfarin_csv);
        bd.behavior = warfarin_behavior(bd.table);
        bd.target = warfarin_target(WarfarinTable::kFeatures + 1);
        bd.true_value = warfarin_true_value(bd.table);
        bd.default_dropout = 0.0;
        bd.default_l2 = 0.1;
        return bd;
    } else {
        throw std::invalid_argument("unknown domain: " + cfg.domain);
    }
    bd.behavior = bd.synthetic.behavior;
    bd.target = bd.synthetic.target;
    bd.true_value = bd.synthetic.true_value;
    return bd;
}

double grid_median(const std::string& grid_text) {
    const BandwidthGrid grid = parse_bandwidth_grid(grid_text);
    return grid.values[grid.values.size() / 2];
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!contains({"quadratic", "abs_error", "multimodal", "warfarin"}, domain))
        throw std::invalid_argument("config: unknown domain '" + domain + "'");
    if (!contains(kSweepKinds, sweep_kind))
        throw std::invalid_argument("config: unknown sweep kind '" + sweep_kind + "'");
    if (sweep_kind != "none" && sweep_values.empty())
        throw std::invalid_argument("config: sweep values must be nonempty");
    if (sweep_kind == "noise_sd" && domain != "quadratic")
        throw std::invalid_argument("config: noise_sd sweep requires the quadratic domain");
    if (sweep_kind == "dummy_dims" && domain != "abs_error")
        throw std::invalid_argument("config: dummy_dims sweep requires the abs_error domain");
    for (double v : sweep_values) {
        if (sweep_kind == "n" && !(v >= 1.0))
            throw std::invalid_argument("config: sample-size sweep values must be >= 1");
        if (sweep_kind == "bandwidth" && !(v > 0.0))
            throw std::invalid_argument("config: bandwidth sweep values must be > 0");
        if (sweep_kind == "dummy_dims" && v < 0.0)
            throw std::invalid_argument("config: dummy_dims sweep values must be >= 0");
        if (sweep_kind == "noise_sd" && v < 0.0)
            throw std::invalid_argument("config: noise_sd sweep values must be >= 0");
    }
    if (estimators.empty()) throw std::invalid_argument("config: estimators must be nonempty");
    for (const auto& e : estimators) {
        if (!contains(kEstimatorIds, e.id))
            throw std::invalid_argument("config: unknown estimator '" + e.id + "'");
        if (!contains({"fixed", "auto-kallus", "auto-slope"}, e.bandwidth_mode))
            throw std::invalid_argument("config: unknown bandwidth mode '" +
                                        e.bandwidth_mode + "'");
        if (e.bandwidth_mode == "fixed" && !(e.fixed_bandwidth > 0.0) &&
            sweep_kind != "bandwidth")
            throw std::invalid_argument("config: fixed bandwidth must be > 0");
        if (e.id == "disc" && e.bins < 1)
            throw std::invalid_argument("config: bins must be >= 1");
        if (e.bandwidth_mode == "auto-slope") parse_bandwidth_grid(e.grid);  // validates
    }
    if (n_trials < 1) throw std::invalid_argument("config: n_trials must be >= 1");
    if (n_samples < 1) throw std::invalid_argument("config: n_samples must be >= 1");
}

ExperimentConfig config_from_json_text(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    ExperimentConfig cfg;
    cfg.domain = j.at("domain").get<std::string>();
    cfg.noise_sd = j.value("noise_sd", 0.5);
    cfg.dummy_dims = j.value("dummy_dims", 0);
    cfg.warfarin_csv = j.value("warfarin_csv", std::string{});
    cfg.warfarin_patients = j.value("warfarin_patients", std::size_t{500});
    cfg.warfarin_table_seed = j.value("warfarin_table_seed", std::uint64_t{1234});
    cfg.n_samples = j.value("n_samples", std::size_t{10000});
    if (j.contains("sweep")) {
        const auto& sw = j.at("sweep");
        cfg.sweep_kind = sw.at("kind").get<std::string>();
        cfg.sweep_values = sw.value("values", Vec{});
    }
    for (const auto& je : j.at("estimators")) {
        EstimatorSpec e;
        e.id = je.at("id").get<std::string>();
        if (je.contains("bandwidth")) {
            const auto& b = je.at("bandwidth");
            if (b.is_number()) {
                e.bandwidth_mode = "fixed";
                e.fixed_bandwidth = b.get<double>();
            } else {
                const std::string mode = b.get<std::string>();
                if (mode == "auto-kallus" || mode == "auto-slope") {
                    e.bandwidth_mode = mode;
                } else {
                    e.bandwidth_mode = "fixed";
                    e.fixed_bandwidth = parse_double(mode);
                }
            }
        }
        e.self_normalize = je.value("self_normalize", true);
        e.bins = je.value("bins", 10);
        e.grid = je.value("grid", std::string{"2^-1..2^-7"});
        cfg.estimators.push_back(std::move(e));
    }
    cfg.n_trials = j.value("n_trials", 20);
    cfg.base_seed = j.value("base_seed", std::uint64_t{0});
    cfg.out_dir = j.value("out_dir", std::string{"results"});
    if (j.contains("model")) {
        cfg.has_model_config = true;
        const auto& m = j.at("model");
        cfg.model_config.learning_rate = m.value("learning_rate", 5e-4);
        cfg.model_config.batch_size = m.value("batch_size", 256);
        cfg.model_config.max_epochs = m.value("max_epochs", 1000);
        cfg.model_config.patience = m.value("patience", 20);
        cfg.model_config.validation_fraction = m.value("validation_fraction", 0.2);
        cfg.model_config.dropout = m.value("dropout", 0.5);
        cfg.model_config.l2 = m.value("l2", 0.0);
    }
    cfg.emit_metrics = j.value("emit_metrics", true);
    cfg.metrics_rows = j.value("metrics_rows", std::size_t{200});
    cfg.validate();
    return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return config_from_json_text(ss.str());
}

RunResult run_experiment(const ExperimentConfig& config) {
    config.validate();
    const Vec sweep = config.sweep_values.empty() ? Vec{0.0} : config.sweep_values;
    const std::size_t n_sweep = sweep.size();
    const std::size_t n_est = config.estimators.size();
    const std::size_t n_trials = static_cast<std::size_t>(config.n_trials);

    const bool domain_varies =
        config.sweep_kind == "dummy_dims" || config.sweep_kind == "noise_sd";
    const bool data_varies = domain_varies || config.sweep_kind == "n";

    bool any_kmis = false, any_kallus = false, needs_model = false;
    for (const auto& e : config.estimators) {
        if (e.id == "kmis") any_kmis = true;
        if ((e.id == "kis" || e.id == "kmis") && e.bandwidth_mode == "auto-kallus" &&
            config.sweep_kind != "bandwidth")
            any_kallus = true;
        if (e.id == "dm" || e.id == "kmis") needs_model = true;
    }
    if (any_kallus) needs_model = true;

    // Domains per sweep value (shared across trials; policies are immutable).
    std::vector<BuiltDomain> domains;
    domains.reserve(n_sweep);
    for (std::size_t si = 0; si < n_sweep; ++si)
        domains.push_back(build_domain(config, sweep[si]));

    RunResult result;
    result.true_value = domains[0].true_value;
    result.records.assign(n_sweep * n_trials * n_est, TrialRecord{});

    parallel_for(n_trials, [&](std::size_t trial) {
        const std::uint64_t seed = config.base_seed + trial;

        // Per-trial cache, rebuilt when the sweep value changes the data.
        LoggedDataset data;
        MlpRewardModel fitted;
        std::vector<Mat> transforms;
        double kallus_h = 0.0;
        std::string kallus_error;
        bool cache_ready = false;

        for (std::size_t si = 0; si < n_sweep; ++si) {
            const BuiltDomain& bd = domains[si];
            const std::size_t n_rows =
                config.sweep_kind == "n"
                    ? static_cast<std::size_t>(std::llround(sweep[si]))
                    : config.n_samples;

            std::string trial_error;
            if (!cache_ready || data_varies) {
                try {
                    data = bd.make_dataset(n_rows, seed);
                    transforms.clear();
                    kallus_h = 0.0;
                    kallus_error.clear();
                    if (needs_model) {
                        RewardModelConfig mc = config.model_config;
                        if (!config.has_model_config) {
                            mc.dropout = bd.default_dropout;
                            mc.l2 = bd.default_l2;
                        }
                        fitted = fit_reward_model(data, mc, seed ^ kFitSeedSalt).first;
                    }
                    if (any_kmis) transforms = metric_transforms(data, bd.target, fitted);
                    if (any_kallus) {
                        try {
                            LomseConstants k;
                            k.c_b = estimate_cb(fitted, data, bd.target);
                            k.c_v = estimate_cv(fitted, data, bd.target, bd.behavior);
                            k.n = data.size();
                            k.d_a = data.action_dim;
                            kallus_h = optimal_bandwidth(k);
                        } catch (const DegenerateBiasError& e) {
                            kallus_h = 0.0;
                            kallus_error = e.what();
                        }
                    }
                    cache_ready = true;
                } catch (const std::exception& e) {
                    trial_error = e.what();
                    cache_ready = false;
                }
            }

            for (std::size_t ei = 0; ei < n_est; ++ei) {
                const EstimatorSpec& spec = config.estimators[ei];
                TrialRecord rec;
                rec.sweep_value = sweep[si];
                rec.trial = static_cast<int>(trial);
                rec.seed = seed;
                rec.estimator = spec.id;
                rec.true_value = bd.true_value;
                if (!trial_error.empty()) {
                    rec.error = trial_error;
                } else {
                    try {
                        const bool kernel = spec.id == "kis" || spec.id == "kmis";
                        double h = 0.0;
                        if (kernel) {
                            if (config.sweep_kind == "bandwidth") {
                                h = sweep[si];
                            } else if (spec.bandwidth_mode == "fixed") {
                                h = spec.fixed_bandwidth;
                            } else if (spec.bandwidth_mode == "auto-kallus") {
                                // Zero-curvature plug-in: fall back to the
                                // middle of the slope grid.
                                h = kallus_h > 0.0 ? kallus_h : grid_median(spec.grid);
                            } else {
                                const BandwidthGrid grid = parse_bandwidth_grid(spec.grid);
                                const auto eval =
                                    spec.id == "kmis"
                                        ? make_kernel_slope_evaluator(data, bd.target,
                                                                      transforms)
                                        : make_kernel_slope_evaluator(data, bd.target);
                                h = slope_select(grid, eval).bandwidth;
                            }
                        }
                        EstimatorReport rep;
                        if (spec.id == "dm") {
                            rep.estimate = dm_estimate(fitted, data, bd.target);
                        } else if (spec.id == "kis") {
                            rep = kernel_is(data, bd.target, h, spec.self_normalize);
                        } else if (spec.id == "kmis") {
                            rep = kernel_is(data, bd.target, h, spec.self_normalize,
                                            transforms);
                            rep.metric_applied = true;
                        } else {
                            rep = discretized_is(data, bd.behavior, bd.target, spec.bins,
                                                 spec.self_normalize);
                        }
                        rec.bandwidth = kernel ? h : 0.0;
                        rec.estimate = rep.estimate;
                        const double diff = rep.estimate - bd.true_value;
                        rec.squared_error = diff * diff;
                    } catch (const std::exception& e) {
                        rec.error = e.what();
                        rec.bandwidth = 0.0;
                        rec.estimate = 0.0;
                        rec.squared_error = 0.0;
                    }
                }
                result.records[(si * n_trials + trial) * n_est + ei] = std::move(rec);
            }

            // Metric visualization export from the first trial of the first
            // sweep point.
            if (si == 0 && trial == 0 && config.emit_metrics && any_kmis &&
                trial_error.empty() && !transforms.empty()) {
                const std::size_t rows = std::min(config.metrics_rows, data.size());
                std::vector<MetricsRow> mrows(rows);
                parallel_for(rows, [&](std::size_t i) {
                    const Vec s = data.state_vec(i);
                    const Vec t = bd.target(s);
                    const SymMatrix hess = hessian_at(fitted, s, t);
                    const StateMetric metric = regularized_metric(hess);
                    const auto eig = sym_eig(metric.a_hat);
                    MetricsRow row;
                    row.state = s;
                    row.target_action = t;
                    row.eigenvalues = eig.eigenvalues;
                    row.eigenvectors = eig.eigenvectors;
                    mrows[i] = std::move(row);
                });
                result.metrics = std::move(mrows);
            }
        }
    });
    return result;
}

std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records) {
    if (records.empty()) throw std::invalid_argument("aggregate: no records");
    std::vector<std::pair<double, std::string>> order;
    std::map<std::pair<double, std::string>, std::vector<const TrialRecord*>> groups;
    for (const auto& r : records) {
        const auto key = std::make_pair(r.sweep_value, r.estimator);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) order.push_back(key);
        it->second.push_back(&r);
    }

    std::vector<AggregateRow> out;
    out.reserve(order.size());
    for (const auto& key : order) {
        const auto& members = groups.at(key);
        std::vector<const TrialRecord*> ok;
        std::size_t n_err = 0;
        for (const TrialRecord* r : members)
            (r->ok() ? ok.push_back(r) : (void)++n_err);
        if (ok.empty())
            throw std::runtime_error(
                "aggregate: no successful records for sweep=" + format_double(key.first) +
                " estimator=" + key.second);

        AggregateRow row;
        row.sweep_value = key.first;
        row.estimator = key.second;
        row.n_ok = ok.size();
        row.n_err = n_err;
        row.true_value = ok.front()->true_value;

        const double n = static_cast<double>(ok.size());
        Vec sq(ok.size()), est(ok.size());
        for (std::size_t i = 0; i < ok.size(); ++i) {
            sq[i] = ok[i]->squared_error;
            est[i] = ok[i]->estimate;
        }
        row.mse = stable_sum(sq) / n;
        row.mean_estimate = stable_sum(est) / n;
        Vec sq_dev(ok.size()), est_dev(ok.size());
        for (std::size_t i = 0; i < ok.size(); ++i) {
            sq_dev[i] = (sq[i] - row.mse) * (sq[i] - row.mse);
            est_dev[i] = (est[i] - row.mean_estimate) * (est[i] - row.mean_estimate);
        }
        row.std_error =
            ok.size() > 1 ? std::sqrt(stable_sum(sq_dev) / (n - 1.0) / n) : 0.0;
        row.variance = stable_sum(est_dev) / n;
        const double bias = row.mean_estimate - row.true_value;
        row.bias2 = bias * bias;
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

std::string sanitize_error(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

void emit(const RunResult& result, const std::vector<AggregateRow>& aggregates,
          const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir + ": " + ec.message());

    {
        const std::string path = dir + "/trials.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f << "sweep,trial,seed,estimator,bandwidth,estimate,squared_error,true_value,error\n";
        for (const auto& r : result.records) {
            f << format_double(r.sweep_value) << "," << r.trial << "," << r.seed << ","
              << r.estimator << "," << format_double(r.bandwidth) << ","
              << format_double(r.estimate) << "," << format_double(r.squared_error) << ","
              << format_double(r.true_value) << "," << sanitize_error(r.error) << "\n";
        }
        if (!f) throw std::runtime_error("write failed: " + path);
    }
    {
        const std::string path = dir + "/summary.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f << "sweep,estimator,n_ok,n_err,mse,std_error,bias2,variance,mean_estimate,"
             "true_value\n";
        for (const auto& a : aggregates) {
            f << format_double(a.sweep_value) << "," << a.estimator << "," << a.n_ok << ","
              << a.n_err << "," << format_double(a.mse) << "," << format_double(a.std_error)
              << "," << format_double(a.bias2) << "," << format_double(a.variance) << ","
              << format_double(a.mean_estimate) << "," << format_double(a.true_value)
              << "\n";
        }
        if (!f) throw std::runtime_error("write failed: " + path);
    }
    {
        nlohmann::json j;
        j["true_value"] = result.true_value;
        auto& groups = j["groups"] = nlohmann::json::array();
        for (const auto& a : aggregates) {
            groups.push_back({{"sweep", a.sweep_value},
                              {"estimator", a.estimator},
                              {"n_ok", a.n_ok},
                              {"n_err", a.n_err},
                              {"mse", a.mse},
                              {"std_error", a.std_error},
                              {"bias2", a.bias2},
                              {"variance", a.variance},
                              {"mean_estimate", a.mean_estimate},
                              {"true_value", a.true_value}});
        }
        const std::string path = dir + "/summary.json";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        f << j.dump(2) << "\n";
        if (!f) throw std::runtime_error("write failed: " + path);
    }
    if (!result.metrics.empty()) {
        const std::string path = dir + "/metrics.csv";
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open for writing: " + path);
        const auto& first = result.metrics.front();
        const int ds = static_cast<int>(first.state.size());
        const int da = static_cast<int>(first.target_action.size());
        for (int d = 1; d <= ds; ++d) f << "s_" << d << ",";
        for (int d = 1; d <= da; ++d) f << "t_" << d << ",";
        for (int d = 1; d <= da; ++d) f << "lam_" << d << ",";
        for (int i = 1; i <= da; ++i)
            for (int c = 1; c <= da; ++c)
                f << "v_" << i << "_" << c << (i == da && c == da ? '\n' : ',');
        for (const auto& row : result.metrics) {
            for (double x : row.state) f << format_double(x) << ",";
            for (double x : row.target_action) f << format_double(x) << ",";
            for (double x : row.eigenvalues) f << format_double(x) << ",";
            for (int i = 0; i < da; ++i)
                for (int c = 0; c < da; ++c)
                    f << format_double(row.eigenvectors(c, i))
                      << (i == da - 1 && c == da - 1 ? '\n' : ',');
        }
        if (!f) throw std::runtime_error("write failed: " + path);
    }
}

std::vector<TrialRecord> load_trials(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw std::runtime_error("empty file: " + path);
    if (line.rfind("sweep,trial,seed,estimator,bandwidth,estimate,squared_error,true_value,"
                   "error",
                   0) != 0)
        throw std::runtime_error(path + ": unexpected trials header");

    std::vector<TrialRecord> out;
    std::size_t lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // First 8 fields are comma-separated; the rest of the line is the
        // error tag (which may itself contain commas).
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (int k = 0; k < 8; ++k) {
            const auto pos = line.find(',', start);
            if (pos == std::string::npos)
                throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                         ": wrong field count");
            cells.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        cells.push_back(line.substr(start));
        try {
            TrialRecord r;
            r.sweep_value = parse_double(cells[0]);
            r.trial = std::stoi(cells[1]);
            r.seed = std::stoull(cells[2]);
            r.estimator = cells[3];
            r.bandwidth = parse_double(cells[4]);
            r.estimate = parse_double(cells[5]);
            r.squared_error = parse_double(cells[6]);
            r.true_value = parse_double(cells[7]);
            r.error = cells[8];
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace kmis
