#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kmis/bandwidth.hpp"
#include "kmis/dataset.hpp"
#include "kmis/domains.hpp"
#include "kmis/estimators.hpp"
#include "kmis/reward_model.hpp"

namespace kmis {

/// One estimator column of an experiment. `bandwidth_mode` is "fixed",
/// "auto-kallus", or "auto-slope"; kernel estimators under a bandwidth sweep
/// take the sweep value instead.
struct EstimatorSpec {
    std::string id;  // dm | kis | kmis | disc
    std::string bandwidth_mode = "auto-kallus";
    double fixed_bandwidth = 0.0;
    bool self_normalize = true;
    int bins = 10;                      // disc
    std::string grid = "2^-1..2^-7";    // auto-slope
};

struct ExperimentConfig {
    std::string domain;  // quadratic | abs_error | multimodal | warfarin
    double noise_sd = 0.5;          // quadratic
    int dummy_dims = 0;             // abs_error
    std::string warfarin_csv;       // empty -> synthetic table
    std::size_t warfarin_patients = 500;
    std::uint64_t warfarin_table_seed = 1234;

    std::size_t n_samples = 10000;
    std::string sweep_kind = "none";  // none | n | bandwidth | dummy_dims | noise_sd
    Vec sweep_values;                 // empty allowed only for "none"

    std::vector<EstimatorSpec> estimators;
    int n_trials = 20;
    std::uint64_t base_seed = 0;
    std::string out_dir = "results";

    bool has_model_config = false;    // else per-domain default
    RewardModelConfig model_config;

    bool emit_metrics = true;
    std::size_t metrics_rows = 200;

    void validate() const;
};

ExperimentConfig config_from_json_text(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);

struct TrialRecord {
    double sweep_value = 0.0;
    int trial = 0;
    std::uint64_t seed = 0;
    std::string estimator;
    double bandwidth = 0.0;  // 0 for dm/disc
    double estimate = 0.0;
    double squared_error = 0.0;
    double true_value = 0.0;
    std::string error;  // empty = ok

    bool ok() const { return error.empty(); }
};

/// Metric visualization row: one state, its target action, and the local
/// metric's spectrum.
struct MetricsRow {
    Vec state;
    Vec target_action;
    Vec eigenvalues;
    Mat eigenvectors;  // columns follow eigenvalue order
};

struct RunResult {
    std::vector<TrialRecord> records;
    std::vector<MetricsRow> metrics;
    double true_value = 0.0;
};

/// Runs |sweep| x n_trials x |estimators| evaluations. Within a trial, every
/// estimator shares the dataset and the (single) fitted reward model.
/// Estimator failures are recorded as per-row error tags; the run continues.
RunResult run_experiment(const ExperimentConfig& config);

struct AggregateRow {
    double sweep_value = 0.0;
    std::string estimator;
    std::size_t n_ok = 0;
    std::size_t n_err = 0;
    double mse = 0.0;
    double std_error = 0.0;  // of the mean squared error
    double bias2 = 0.0;
    double variance = 0.0;   // population, so mse == bias2 + variance
    double mean_estimate = 0.0;
    double true_value = 0.0;
};

/// Groups by (sweep value, estimator). Throws if a group has no successful
/// records.
std::vector<AggregateRow> aggregate(const std::vector<TrialRecord>& records);

/// Writes trials.csv, summary.csv, summary.json, and (when metric rows are
/// present) metrics.csv under dir.
void emit(const RunResult& result, const std::vector<AggregateRow>& aggregates,
          const std::string& dir);

std::vector<TrialRecord> load_trials(const std::string& path);

}  // namespace kmis
