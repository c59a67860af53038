#pragma once

#include "ctsid/harness.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctsid {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One schema-validated config document drives every subcommand. Sections:
// model, plant, controller, signals, sampling, predictor, optimizer,
// experiment, output. Unknown keys are rejected at every level; observer pole
// sets are lists of [re, im] pairs and are never auto-completed.
struct RunConfig {
    ModelStructure ms;                                // model (required)
    std::optional<Eigen::VectorXd> theta;             // plant.theta
    TransferFunction controller;                      // default: zero (open loop)
    SignalSpec r_u, r_y, w, eta;                      // default: zero
    bool has_sampling = false;
    double h = 0.0;
    Eigen::Index N = 0;
    Eigen::Index warmup = 0;
    std::optional<PredictorKind> kind;                // predictor
    LMOptions opts;                                   // optimizer
    int ee_starts = 1;                                // optimizer.ee_starts
    int random_starts = 1;                            // optimizer.random_starts
    std::vector<Eigen::VectorXd> explicit_starts;     // optimizer.theta0 (overrides)
    int trials = 20;                                  // experiment
    std::uint64_t base_seed = 1;
    std::vector<double> sweep_real_parts;
    bool shadows = true;                              // output
    double omega_lo = 0.1, omega_hi = 1000.0;
    Eigen::Index omega_points = 200;

    // Simulation-ready scenario; requires plant + sampling, and the predictor
    // section too when `need_predictor` is set.
    Scenario to_scenario(bool need_predictor) const;
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config_file(const std::string& path);
RunConfig config_from_scenario(const Scenario& sc);
std::string config_to_json(const RunConfig& cfg);

}  // namespace ctsid
