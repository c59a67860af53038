#pragma once

#include "ctsid/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace ctsid {

// Exogenous-signal description: excitations (r_u, r_y), disturbance w, and
// measurement noise eta are all built from these four kinds.
struct SignalSpec {
    enum class Kind { zero, constant, square_wave, zoh_gaussian };

    Kind kind = Kind::zero;
    double amplitude = 0.0;   // square_wave
    double period = 0.0;      // square_wave [s]
    double value = 0.0;       // constant
    double mean = 0.0;        // zoh_gaussian
    double stddev = 0.0;      // zoh_gaussian
    double hold = 0.0;        // zoh_gaussian hold interval [s]
    std::uint64_t seed = 0;   // zoh_gaussian stream seed

    static SignalSpec zero();
    static SignalSpec constant(double value);
    static SignalSpec square_wave(double amplitude, double period);
    static SignalSpec zoh_gaussian(double mean, double stddev, double hold, std::uint64_t seed = 0);

    void validate() const;
    bool is_random() const { return kind == Kind::zoh_gaussian && stddev > 0.0; }
    // Finest time scale on which the signal changes value; 0 when constant.
    double time_scale() const;
    SignalSpec with_seed(std::uint64_t s) const;
};

// Sample the signal at t = k*step for k = 0..count-1. zoh_gaussian draws one
// value per hold interval from its own seeded stream; the hold interval must be
// an integer multiple of step.
Eigen::VectorXd make_signal(const SignalSpec& spec, double step, Eigen::Index count);

}  // namespace ctsid
