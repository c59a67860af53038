#pragma once

#include "ctsid/model.hpp"
#include "ctsid/placement.hpp"
#include "ctsid/simulate.hpp"

#include <Eigen/Dense>

namespace ctsid {

// Residual sequence e(kh) = y(kh) - yhat(kh). When `diverged` is set the
// estimator treats the cost as +infinity; entries from first_bad_index on are
// zeroed. A prediction system whose propagation dynamics are unstable (oe,
// stabilized_oe, free_gain kinds) is flagged immediately: the error grows
// without bound even when a short data window keeps it below the runtime limit.
struct ResidualSeries {
    Eigen::VectorXd e;
    bool diverged = false;
    Eigen::Index first_bad_index = -1;

    double cost() const;
};

enum class PredictorType {
    oe,
    stabilized_oe,
    fixed_pole_observer,
    fixed_pole_extended_observer,
    free_gain_observer,
};

// Prediction-model selector plus its kind-specific ingredients.
struct PredictorKind {
    PredictorType type = PredictorType::oe;
    TransferFunction virtual_controller;  // stabilized_oe
    PoleSet p_ob;                         // fixed-pole kinds
    Eigen::VectorXd gain0;                // free_gain starting gain (a decision variable)
    // Initial states/d0 are decision variables by default; set to hold them at
    // zero instead (ablation switch; honored by the estimator).
    bool pin_initial_states = false;

    static PredictorKind oe();
    static PredictorKind stabilized_oe(TransferFunction virtual_controller);
    static PredictorKind fixed_pole_observer(PoleSet p_ob);
    static PredictorKind fixed_pole_extended_observer(PoleSet p_ob);
    static PredictorKind free_gain_observer(Eigen::VectorXd gain0);

    void validate(const ModelStructure& ms) const;
    const char* name() const;
    // Estimated-initial-state count (model states, plus virtual-controller
    // states for stabilized_oe).
    Eigen::Index state_dim(const ModelStructure& ms) const;
    bool has_d() const { return type == PredictorType::fixed_pole_extended_observer; }
    Eigen::Index gain_dim(const ModelStructure& ms) const;
};

// --- residual operations (one per prediction model) ---

ResidualSeries oe_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& x0, const DataSet& data);

// x0_aug stacks model states then virtual-controller states.
ResidualSeries stabilized_oe_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& x0_aug, const DataSet& data,
                                       const TransferFunction& virtual_controller);

ResidualSeries observer_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                  const Eigen::VectorXd& x0, const DataSet& data,
                                  const PoleSet& p_ob);

ResidualSeries extended_observer_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                           const Eigen::VectorXd& x0, double d0,
                                           const DataSet& data, const PoleSet& p_ob);

ResidualSeries free_gain_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& K_x, const Eigen::VectorXd& x0,
                                   const DataSet& data);

// --- propagation cores with explicit gains (shared by the ops and by tests) ---

// xhat+ = (Ad - Gamma K C) xhat + Bd u + Gamma K y with Gamma = int_0^h e^{At}dt:
// the innovation is held over each sample interval, the gain acts continuously.
ResidualSeries observer_residuals_with_gain(const StateSpace& ss, const Eigen::VectorXd& K_x,
                                            const Eigen::VectorXd& x0, const DataSet& data);

// Augmented (n+1)-state propagation; d_trace (optional) receives the
// input-correction state d(kh).
ResidualSeries extended_residuals_with_gain(const StateSpace& ss, const Eigen::VectorXd& K_x,
                                            double K_d, const Eigen::VectorXd& x0, double d0,
                                            const DataSet& data,
                                            Eigen::VectorXd* d_trace = nullptr);

// Kind dispatcher used by the estimator: x0 sized per kind, d0/gain used when
// the kind requires them. Placement failures propagate as exceptions.
ResidualSeries predictor_residuals(const ModelStructure& ms, const PredictorKind& kind,
                                   const Eigen::VectorXd& theta, const Eigen::VectorXd& x0,
                                   double d0, const Eigen::VectorXd& gain, const DataSet& data);

}  // namespace ctsid
