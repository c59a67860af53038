#pragma once

#include "ctsid/predictor.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ctsid {

struct LMOptions {
    int max_iterations = 300;
    double cost_tolerance = 1e-12;  // relative decrease per accepted step
    double step_tolerance = 1e-12;  // relative step length
    double lambda0 = 1e-3;
    double lambda_up = 10.0;
    double lambda_down = 0.5;
    double fd_rel_step = 1e-6;

    void validate() const;
};

// Outcome of one optimization run. The decision vector is
// [theta, initial states, d0 (extended only), K_x (free-gain only)].
struct EstimationResult {
    Eigen::VectorXd v;
    Eigen::VectorXd theta;
    Eigen::VectorXd x0;
    std::optional<double> d0;
    Eigen::VectorXd gain;  // free_gain_observer only
    double cost = 0.0;
    int iterations = 0;
    int accepted_steps = 0;
    std::string termination;
    std::vector<double> cost_trace;  // cost after each accepted step, starting at v0
};

struct LMRun {
    Eigen::VectorXd v;
    double cost = 0.0;
    int iterations = 0;
    int accepted_steps = 0;
    std::string termination;
    std::vector<double> cost_trace;
};

using ResidualFn = std::function<ResidualSeries(const Eigen::VectorXd&)>;

// Damped normal-equation steps (J^T J + lambda diag(J^T J)) delta = -J^T e with
// forward-finite-difference Jacobians (backward fallback when the forward point
// diverges). Infinite-cost evaluations are rejected steps, never aborts.
// Throws when v0 itself has infinite cost (use multi_start).
LMRun levenberg_marquardt(const ResidualFn& residual_fn, const Eigen::VectorXd& v0,
                          const LMOptions& opts = {});

// Wire the predictor kind into the LM solver; initial states start at zero,
// d0 at zero, the free gain at kind.gain0.
EstimationResult estimate(const ModelStructure& ms, const DataSet& data, const PredictorKind& kind,
                          const Eigen::VectorXd& theta0, const LMOptions& opts = {});

struct StartSummary {
    Eigen::VectorXd theta0;
    bool feasible = false;
    double cost = 0.0;
    std::string termination;
};

struct MultiStartResult {
    EstimationResult best;
    int best_index = -1;
    std::vector<StartSummary> starts;
};

// Run estimate from each start and keep the lowest final cost.
MultiStartResult multi_start(const ModelStructure& ms, const DataSet& data,
                             const PredictorKind& kind, const std::vector<Eigen::VectorXd>& starts,
                             const LMOptions& opts = {});

// Default random start: denominator roots log-uniform in [0.1, 100] rad/s
// magnitude with random real-part signs; numerator scaled so the DC gain
// magnitude matches the output/input RMS ratio.
Eigen::VectorXd default_theta_sampler(const ModelStructure& ms, double rms_u, double rms_y,
                                      Rng& rng);

struct EquationErrorCandidate {
    Eigen::VectorXd theta;
    double lambda = 0.0;    // state-variable-filter bandwidth [rad/s]
    double residual = 0.0;  // normalized equation-error residual
};

// State-variable-filter least squares: filter u, y (de-meaned) through
// 1/(p+lambda)^n chains, solve the linear equation-error system, one candidate
// per grid lambda, sorted by residual (best first).
std::vector<EquationErrorCandidate> equation_error_candidates(const ModelStructure& ms,
                                                              const DataSet& data);

// Best equation-error candidate.
Eigen::VectorXd equation_error_start(const ModelStructure& ms, const DataSet& data);

// Reflect right-half-plane denominator roots across the imaginary axis
// (|den(iw)| is preserved); used to make OE starts feasible.
Eigen::VectorXd stabilize_denominator(const ModelStructure& ms, const Eigen::VectorXd& theta);

}  // namespace ctsid
