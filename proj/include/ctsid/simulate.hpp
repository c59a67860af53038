#pragma once

#include "ctsid/model.hpp"
#include "ctsid/signals.hpp"

#include <Eigen/Dense>

#include <stdexcept>

namespace ctsid {

// Loop state exceeded the runtime limit (unstable interconnection); callers
// can tell this apart from input/configuration errors.
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sampled input/output record {u(kh), y(kh)}, optionally carrying the
// noise-free shadow trajectory (random noises zeroed, same excitation).
struct DataSet {
    double h = 0.0;
    Eigen::VectorXd u;
    Eigen::VectorXd y;
    bool has_shadows = false;
    Eigen::VectorXd u0;
    Eigen::VectorXd y0;

    Eigen::Index size() const { return u.size(); }
};

struct LoopSignals {
    SignalSpec r_u;
    SignalSpec r_y;
    SignalSpec w;
    SignalSpec eta;

    // Same references, zero disturbance and measurement noise (the shadow run).
    LoopSignals noise_free() const;
};

// Continuous-time state matrix of the plant/controller interconnection
// (diagnostic: the loop is internally stable iff this is Hurwitz).
Eigen::MatrixXd closed_loop_matrix(const TransferFunction& plant,
                                   const TransferFunction& controller);

// Generate closed-loop data for y = P(p)(u + w) + eta, u = r_u + K(p)(r_y - y).
// The controller runs as its exact ZOH discretization at h driven by the
// sampled tracking error, u is held between samples (how a DAC applies it),
// and the plant is integrated exactly under the held u + w on a grid fine
// enough for every hold interval. The first `warmup` samples are discarded.
DataSet simulate_closed_loop(const TransferFunction& plant, const TransferFunction& controller,
                             const LoopSignals& signals, double h, Eigen::Index N,
                             Eigen::Index warmup, bool want_shadows = true);

}  // namespace ctsid
