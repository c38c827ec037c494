// Command-line front end: dataset generation, reward-model fitting,
// single-shot evaluation, and config-driven experiment runs.

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kmis/bandwidth.hpp"
#include "kmis/domains.hpp"
#include "kmis/estimators.hpp"
#include "kmis/harness.hpp"
#include "kmis/reward_model.hpp"

namespace {

using nlohmann::json;

struct DomainArgs {
    std::string domain = "quadratic";
    double noise_sd = 0.5;
    int dummy_dims = 0;
    std::string warfarin_csv;
    std::size_t patients = 500;
    std::uint64_t table_seed = 1234;
};

void add_domain_options(CLI::App* cmd, DomainArgs& d) {
    cmd->add_option("--domain", d.domain, "quadratic | abs_error | multimodal | warfarin")
        ->required();
    cmd->add_option("--noise-sd", d.noise_sd, "reward noise (quadratic)");
    cmd->add_option("--dummy-dims", d.dummy_dims, "extra action dims (abs_error)");
    cmd->add_option("--warfarin-csv", d.warfarin_csv, "patient table (warfarin)");
    cmd->add_option("--patients", d.patients, "synthetic table size (warfarin)");
    cmd->add_option("--table-seed", d.table_seed, "synthetic table seed (warfarin)");
}

struct Built {
    bool is_warfarin = false;
    kmis::SyntheticDomain synthetic;
    kmis::WarfarinTable table;
    kmis::BehaviorPolicy behavior;
    kmis::TargetPolicy target;
};

Built build(const DomainArgs& d) {
    Built b;
    if (d.domain == "quadratic") {
        b.synthetic = kmis::make_quadratic(d.noise_sd);
    } else if (d.domain == "abs_error") {
        b.synthetic = kmis::make_abs_error(d.dummy_dims);
    } else if (d.domain == "multimodal") {
        b.synthetic = kmis::make_multimodal();
    } else if (d.domain == "warfarin") {
        b.is_warfarin = true;
        b.table = d.warfarin_csv.empty()
                      ? kmis::warfarin_synthetic(d.patients, d.table_seed)
                      : kmis::warfarin_load(d.warfarin_csv);
        b.behavior = kmis::warfarin_behavior(b.table);
        b.target = kmis::warfarin_target(kmis::WarfarinTable::kFeatures + 1);
        return b;
    } else {
        throw CLI::ValidationError("--domain", "unknown domain: " + d.domain);
    }
    b.behavior = b.synthetic.behavior;
    b.target = b.synthetic.target;
    return b;
}

json report_json(const kmis::EstimatorReport& rep) {
    return json{{"estimate", rep.estimate},
                {"n_used", rep.n_used},
                {"bandwidth", rep.bandwidth},
                {"self_normalized", rep.self_normalized},
                {"weight_sum", rep.weight_sum},
                {"max_weight_share", rep.max_weight_share},
                {"metric_applied", rep.metric_applied}};
}

int cmd_generate(const DomainArgs& d, std::size_t n, std::uint64_t seed,
                 const std::string& out) {
    const Built b = build(d);
    const kmis::LoggedDataset data =
        b.is_warfarin ? kmis::warfarin_make_logged(b.table, seed, n)
                      : kmis::generate_dataset(b.synthetic, n, seed);
    kmis::save_dataset_csv(data, out);
    std::cout << "wrote " << data.size() << " rows (state_dim=" << data.state_dim
              << ", action_dim=" << data.action_dim << ") to " << out << "\n";
    return 0;
}

int cmd_warfarin_table(std::size_t patients, std::uint64_t seed, const std::string& out) {
    const kmis::WarfarinTable t = kmis::warfarin_synthetic(patients, seed);
    kmis::warfarin_save(t, out);
    std::cout << "wrote " << t.size() << " patients to " << out << "\n";
    return 0;
}

int cmd_fit(const std::string& data_path, const std::string& out, std::uint64_t seed,
            kmis::RewardModelConfig cfg) {
    const kmis::LoggedDataset data = kmis::load_dataset_csv(data_path);
    auto [model, report] = kmis::fit_reward_model(data, cfg, seed);
    kmis::save_model(model, out);
    json j{{"epochs_run", report.epochs_run},
           {"best_validation_nll", report.best_validation_nll},
           {"epoch0_validation_nll", report.epoch0_validation_nll},
           {"n_train", report.n_train},
           {"n_validation", report.n_validation},
           {"seed", report.seed},
           {"model", out}};
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_evaluate(const DomainArgs& d, const std::string& data_path,
                 const std::string& estimator, const std::string& model_path,
                 const std::string& bandwidth, const std::string& grid,
                 bool self_normalize, int bins) {
    const Built b = build(d);
    const kmis::LoggedDataset data = kmis::load_dataset_csv(data_path);

    std::optional<kmis::MlpRewardModel> model;
    const bool kernel = estimator == "kis" || estimator == "kmis";
    const bool wants_kallus = kernel && bandwidth == "auto-kallus";
    if (estimator == "dm" || estimator == "kmis" || wants_kallus) {
        if (model_path.empty())
            throw CLI::ValidationError("--model", "required for " + estimator +
                                                      (wants_kallus ? " with auto-kallus" : ""));
        model = kmis::load_model(model_path);
    }

    json out = json::object();
    if (estimator == "dm") {
        kmis::EstimatorReport rep;
        rep.estimate = kmis::dm_estimate(*model, data, b.target);
        rep.n_used = data.size();
        out = report_json(rep);
    } else if (estimator == "disc") {
        out = report_json(
            kmis::discretized_is(data, b.behavior, b.target, bins, self_normalize));
        out["bins"] = bins;
    } else if (estimator == "kis" || estimator == "kmis") {
        std::vector<kmis::Mat> transforms;
        if (estimator == "kmis")
            transforms = kmis::metric_transforms(data, b.target, *model);

        double h = 0.0;
        if (wants_kallus) {
            kmis::LomseConstants k;
            k.c_b = kmis::estimate_cb(*model, data, b.target);
            k.c_v = kmis::estimate_cv(*model, data, b.target, b.behavior);
            k.n = data.size();
            k.d_a = data.action_dim;
            h = kmis::optimal_bandwidth(k);
            out["lomse"] = {{"c_b", k.c_b}, {"c_v", k.c_v}};
        } else if (bandwidth == "auto-slope") {
            const kmis::BandwidthGrid g = kmis::parse_bandwidth_grid(grid);
            const auto eval = estimator == "kmis"
                                  ? kmis::make_kernel_slope_evaluator(data, b.target,
                                                                      transforms)
                                  : kmis::make_kernel_slope_evaluator(data, b.target);
            const kmis::SlopeSelection sel = kmis::slope_select(g, eval);
            h = sel.bandwidth;
            json pts = json::array();
            for (const auto& p : sel.points)
                pts.push_back({{"h", p.bandwidth},
                               {"estimate", p.estimate},
                               {"width", p.width},
                               {"accepted", p.accepted},
                               {"error", p.error}});
            out["slope"] = {{"points", pts}, {"selected", sel.bandwidth}};
        } else {
            h = kmis::parse_double(bandwidth);
        }

        const kmis::EstimatorReport rep =
            estimator == "kmis"
                ? kmis::kernel_is(data, b.target, h, self_normalize, transforms)
                : kmis::kernel_is(data, b.target, h, self_normalize);
        json r = report_json(rep);
        r.update(out);
        out = std::move(r);
    } else {
        throw CLI::ValidationError("--estimator", "unknown estimator: " + estimator);
    }
    out["estimator"] = estimator;
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_override) {
    kmis::ExperimentConfig cfg = kmis::config_from_json_file(config_path);
    if (!out_override.empty()) cfg.out_dir = out_override;
    const kmis::RunResult result = kmis::run_experiment(cfg);
    const auto agg = kmis::aggregate(result.records);
    kmis::emit(result, agg, cfg.out_dir);

    std::size_t failed = 0;
    for (const auto& r : result.records)
        if (!r.ok()) ++failed;
    if (failed > 0)
        std::cerr << "warning: " << failed << " of " << result.records.size()
                  << " evaluations failed (see trials.csv)\n";

    std::cout << "sweep=" << (cfg.sweep_kind == "none" ? "-" : cfg.sweep_kind)
              << " trials=" << cfg.n_trials << " true_value=" << result.true_value << "\n";
    for (const auto& a : agg) {
        std::cout << "  sweep=" << a.sweep_value << " " << a.estimator
                  << ": mse=" << a.mse << " (se " << a.std_error << ") bias2=" << a.bias2
                  << " var=" << a.variance << " ok=" << a.n_ok << "/"
                  << (a.n_ok + a.n_err) << "\n";
    }
    std::cout << "results in " << cfg.out_dir << "\n";
    return failed > 0 ? 3 : 0;
}

int cmd_aggregate(const std::string& trials_path, const std::string& out_dir) {
    kmis::RunResult result;
    result.records = kmis::load_trials(trials_path);
    const auto agg = kmis::aggregate(result.records);
    if (!agg.empty()) result.true_value = agg.front().true_value;
    kmis::emit(result, agg, out_dir);
    std::cout << "wrote summary for " << agg.size() << " groups to " << out_dir << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Off-policy evaluation for continuous-action logged data"};
    app.require_subcommand(1);

    DomainArgs gen_domain;
    std::size_t gen_n = 10000;
    std::uint64_t gen_seed = 0;
    std::string gen_out = "data.csv";
    auto* gen = app.add_subcommand("generate", "Sample a logged dataset");
    add_domain_options(gen, gen_domain);
    gen->add_option("--n", gen_n, "rows (warfarin: 0 = one per patient)");
    gen->add_option("--seed", gen_seed, "rng seed");
    gen->add_option("--out", gen_out, "output csv")->required();

    std::size_t wt_patients = 500;
    std::uint64_t wt_seed = 1234;
    std::string wt_out = "warfarin.csv";
    auto* wt = app.add_subcommand("warfarin-table", "Sample a synthetic patient table");
    wt->add_option("--patients", wt_patients, "table size");
    wt->add_option("--seed", wt_seed, "rng seed");
    wt->add_option("--out", wt_out, "output csv")->required();

    std::string fit_data, fit_out = "model.json";
    std::uint64_t fit_seed = 0;
    kmis::RewardModelConfig fit_cfg;
    auto* fit = app.add_subcommand("fit-reward", "Fit the reward regressor");
    fit->add_option("--data", fit_data, "logged dataset csv")->required();
    fit->add_option("--out", fit_out, "model json path");
    fit->add_option("--seed", fit_seed, "training seed");
    fit->add_option("--dropout", fit_cfg.dropout, "dropout rate");
    fit->add_option("--l2", fit_cfg.l2, "weight decay");
    fit->add_option("--max-epochs", fit_cfg.max_epochs, "epoch cap");
    fit->add_option("--patience", fit_cfg.patience, "early-stopping patience");
    fit->add_option("--batch-size", fit_cfg.batch_size, "minibatch size");
    fit->add_option("--learning-rate", fit_cfg.learning_rate, "Adam step size");

    DomainArgs ev_domain;
    std::string ev_data, ev_estimator, ev_model, ev_bandwidth = "auto-kallus";
    std::string ev_grid = "2^-1..2^-7";
    bool ev_self_normalize = true;
    int ev_bins = 10;
    auto* ev = app.add_subcommand("evaluate", "Run one estimator on a dataset");
    add_domain_options(ev, ev_domain);
    ev->add_option("--data", ev_data, "logged dataset csv")->required();
    ev->add_option("--estimator", ev_estimator, "dm | kis | kmis | disc")->required();
    ev->add_option("--model", ev_model, "reward model json (dm/kmis/auto-kallus)");
    ev->add_option("--bandwidth", ev_bandwidth, "number | auto-kallus | auto-slope");
    ev->add_option("--grid", ev_grid, "slope grid, e.g. 2^-1..2^-7");
    ev->add_flag("--self-normalize,!--no-self-normalize", ev_self_normalize,
                 "divide by summed weights");
    ev->add_option("--bins", ev_bins, "bins per dim (disc)");

    std::string run_config, run_out;
    auto* run = app.add_subcommand("run", "Run a config-driven experiment");
    run->add_option("--config", run_config, "experiment json")->required();
    run->add_option("--out", run_out, "override output directory");

    std::string agg_trials, agg_out = "results";
    auto* agg = app.add_subcommand("aggregate", "Summarize a trials.csv");
    agg->add_option("--trials", agg_trials, "trials csv")->required();
    agg->add_option("--out", agg_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(gen_domain, gen_n, gen_seed, gen_out);
        if (wt->parsed()) return cmd_warfarin_table(wt_patients, wt_seed, wt_out);
        if (fit->parsed()) return cmd_fit(fit_data, fit_out, fit_seed, fit_cfg);
        if (ev->parsed())
            return cmd_evaluate(ev_domain, ev_data, ev_estimator, ev_model, ev_bandwidth,
                                ev_grid, ev_self_normalize, ev_bins);
        if (run->parsed()) return cmd_run(run_config, run_out);
        if (agg->parsed()) return cmd_aggregate(agg_trials, agg_out);
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
