#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riekit/data_io.hpp"
#include "riekit/gmv_qp.hpp"
#include "riekit/synth.hpp"

namespace riekit {

/// Sweep description: the data source (a returns CSV, or the synthetic
/// model when data_path is empty), portfolio size, window-length grids,
/// trial count, and the master seed from which every per-trial seed is
/// derived.
struct ExperimentConfig {
    std::string data_path;  // empty = synthetic source
    MarketModel model;      // synthetic source parameters
    long synthetic_days = 3600;
    long n = 50;
    std::vector<long> delta_in_list = {200, 1000, 2000};
    std::vector<long> delta_out_list = {30, 60, 125, 250, 500, 1000};
    long trials = 100;
    bool stationarized = false;
    std::uint64_t seed = 0;
    std::string output_path = "experiment.csv";
    long threads = 0;  // worker count; 0 = one per hardware thread
};

/// trials >= 1, every window length >= 2, n >= 2, nonempty grids.
void validate_config(const ExperimentConfig& config);

/// Flat `key = value` file; '#' starts a comment, blank lines are skipped,
/// unknown keys are rejected. Keys mirror the config fields (README lists
/// them all).
ExperimentConfig load_config_file(const std::string& path);

/// One window draw evaluated with all four estimators. Volatilities are
/// annualized; the two solver statuses are recorded even when a solve does
/// not converge.
struct TrialRecord {
    long delta_in = 0;
    long delta_out = 0;
    long trial_index = 0;
    double vol_sample = 0.0;
    double vol_oracle = 0.0;
    double vol_qp = 0.0;
    double vol_qp_sorted = 0.0;
    QpStatus qp_status = QpStatus::Converged;
    QpStatus qp_sorted_status = QpStatus::Converged;
};

/// Estimate both window covariances, decompose the in-sample one, and
/// price all four portfolios against the out-of-sample covariance:
/// sample and oracle via (pseudo-)inverse estimators in the in-sample
/// basis, qp and qp_sorted via the direct weight programs. Solver
/// non-convergence lands in the status fields, never as an exception.
TrialRecord run_trial(const WindowPair& pair);

/// The full grid: for every (delta_in, delta_out) combination and trial
/// index, draw a window pair (stationarized when flagged) and run the
/// trial. Trials execute on a worker pool; every trial's seed is derived
/// from (config.seed, combination, trial), so results are byte-identical
/// for a fixed config regardless of thread count.
std::vector<TrialRecord> run_sweep(const ExperimentConfig& config);

/// One aggregated line of the summary CSV.
struct SummaryRow {
    long delta_in = 0;
    long delta_out = 0;
    std::string method;  // sample | oracle | qp | qp_sorted
    double mean_vol = 0.0;
    double stderr_vol = 0.0;
    long n_trials = 0;  // trials contributing to the mean
    long n_failed = 0;  // non-converged solves, excluded from the mean
};

/// Writes the summary CSV to output_path and the per-trial CSV next to it
/// (same name with a `_raw` suffix before the extension); returns the
/// summary rows in emission order.
std::vector<SummaryRow> aggregate_and_emit(const std::vector<TrialRecord>& records,
                                           const std::string& output_path);

}  // namespace riekit
