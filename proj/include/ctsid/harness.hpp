#pragma once

#include "ctsid/estimator.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace ctsid {

// A complete benchmark description: data-generating system, excitation/noise,
// sampling, prediction model, and experiment defaults.
struct Scenario {
    std::string name;
    ModelStructure ms;
    Eigen::VectorXd theta_star;
    TransferFunction controller;
    SignalSpec r_u, r_y, w, eta;
    double h = 0.0;
    Eigen::Index N = 0;
    Eigen::Index warmup = 0;
    PredictorKind kind;
    int default_trials = 20;
    std::uint64_t base_seed = 1;
    // Per-trial start policy: this many equation-error candidates plus this
    // many default-sampler draws feed multi_start.
    int ee_starts = 1;
    int random_starts = 1;

    TransferFunction plant() const { return theta_to_tf(ms, theta_star); }
    // Disturbance and measurement-noise channels zeroed; references kept.
    Scenario noise_free() const;
};

// Built-in scenarios with the published benchmark values.
Scenario scenario_a();  // maglev closed loop, random w and eta
Scenario scenario_b();  // Rao-Garnier open loop, constant w = 10
Scenario scenario_c();  // maglev closed loop, constant w = 1
Scenario scenario_by_name(const std::string& name);

// Signal stream indices within a trial (the documented sub-stream rule).
enum SignalStream : std::uint64_t { kStreamRu = 0, kStreamRy = 1, kStreamW = 2, kStreamEta = 3 };

// Dataset for one trial: every random signal gets stream_seed(base_seed, trial, index).
DataSet generate_trial_data(const Scenario& sc, std::uint64_t trial, bool want_shadows = false);

// Multi-start list: the best `ee_starts` equation-error candidates plus
// `random_starts` default-sampler draws (sub-streams 4, 5, ... of the trial).
// Denominators are stabilized for the kinds that need a stable start.
std::vector<Eigen::VectorXd> build_starts(const ModelStructure& ms, const PredictorKind& kind,
                                          const DataSet& data, std::uint64_t base_seed,
                                          std::uint64_t trial, int ee_starts, int random_starts);

// Per-trial multi-start list under the scenario's start policy.
std::vector<Eigen::VectorXd> trial_starts(const Scenario& sc, const DataSet& data,
                                          std::uint64_t trial);

struct TrialRecord {
    std::uint64_t trial = 0;
    bool ok = false;
    std::string error;
    Eigen::VectorXd theta;
    double cost = 0.0;
    std::string termination;
    int start_index = -1;
};

struct TrialStats {
    std::vector<TrialRecord> records;      // one per trial, failures included
    Eigen::MatrixXd theta_table;           // successful trials only, row-per-trial
    Eigen::VectorXd median, q1, q3, min, max;
    int n_failed = 0;
};

// Per-parameter sample quantile (linear interpolation between order statistics).
Eigen::VectorXd column_quantile(const Eigen::MatrixXd& table, double p);
// Per-parameter median of |theta_hat - theta_star| / |theta_star|.
Eigen::VectorXd median_abs_rel_error(const Eigen::MatrixXd& table,
                                     const Eigen::VectorXd& theta_star);

TrialStats run_monte_carlo(const Scenario& sc, int trials, const LMOptions& opts = {});

struct SweepRow {
    double real_part = 0.0;
    Eigen::VectorXd median;
    int n_failed = 0;
};

// run_monte_carlo with the real part of every observer pole substituted.
std::vector<SweepRow> pole_sensitivity_sweep(const Scenario& sc,
                                             const std::vector<double>& real_parts, int trials,
                                             const LMOptions& opts = {});

struct BodeTable {
    Eigen::VectorXd omega;
    Eigen::VectorXd true_mag_db, true_phase_deg;
    Eigen::MatrixXd est_mag_db, est_phase_deg;  // one column per estimate
};

// Frequency responses in dB / unwrapped degrees for the true system and a list
// of estimated parameter vectors.
BodeTable bode_table(const TransferFunction& true_tf, const std::vector<Eigen::VectorXd>& estimates,
                     const ModelStructure& ms, const Eigen::VectorXd& omega);

Eigen::VectorXd log_grid(double lo, double hi, Eigen::Index points);

}  // namespace ctsid
