#include "ctsid/signals.hpp"

#include <cmath>
#include <stdexcept>

namespace ctsid {
namespace {

// k*step expressed in units of `scale`, as an exact integer when the two are
// commensurate (tolerance 1e-6 relative), so square edges and hold boundaries
// land on exact sample indices instead of drifting with fmod roundoff.
long long scaled_index(Eigen::Index k, double step, double scale) {
    const double ratio = scale / step;
    const double rounded = std::round(ratio);
    if (rounded >= 1.0 && std::abs(ratio - rounded) <= 1e-6 * ratio)
        return static_cast<long long>(k) / static_cast<long long>(rounded);
    return static_cast<long long>(std::floor(static_cast<double>(k) * step / scale));
}

}  // namespace

SignalSpec SignalSpec::zero() {
    return {};
}

SignalSpec SignalSpec::constant(double value) {
    SignalSpec s;
    s.kind = Kind::constant;
    s.value = value;
    return s;
}

SignalSpec SignalSpec::square_wave(double amplitude, double period) {
    SignalSpec s;
    s.kind = Kind::square_wave;
    s.amplitude = amplitude;
    s.period = period;
    return s;
}

SignalSpec SignalSpec::zoh_gaussian(double mean, double stddev, double hold, std::uint64_t seed) {
    SignalSpec s;
    s.kind = Kind::zoh_gaussian;
    s.mean = mean;
    s.stddev = stddev;
    s.hold = hold;
    s.seed = seed;
    return s;
}

void SignalSpec::validate() const {
    switch (kind) {
        case Kind::square_wave:
            if (!(period > 0.0)) throw std::runtime_error("signal: square wave period must be > 0");
            break;
        case Kind::zoh_gaussian:
            if (!(hold > 0.0)) throw std::runtime_error("signal: hold interval must be > 0");
            if (stddev < 0.0) throw std::runtime_error("signal: standard deviation must be >= 0");
            break;
        default:
            break;
    }
}

double SignalSpec::time_scale() const {
    if (kind == Kind::square_wave) return period / 2.0;
    if (kind == Kind::zoh_gaussian) return hold;
    return 0.0;
}

SignalSpec SignalSpec::with_seed(std::uint64_t s) const {
    SignalSpec out = *this;
    out.seed = s;
    return out;
}

Eigen::VectorXd make_signal(const SignalSpec& spec, double step, Eigen::Index count) {
    spec.validate();
    if (!(step > 0.0) || count < 0) throw std::runtime_error("make_signal: invalid grid");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(count);
    switch (spec.kind) {
        case SignalSpec::Kind::zero:
            break;
        case SignalSpec::Kind::constant:
            out.setConstant(spec.value);
            break;
        case SignalSpec::Kind::square_wave:
            for (Eigen::Index k = 0; k < count; ++k) {
                const long long half = scaled_index(k, step, spec.period / 2.0);
                out[k] = (half % 2 == 0) ? spec.amplitude : -spec.amplitude;
            }
            break;
        case SignalSpec::Kind::zoh_gaussian: {
            const double ratio = spec.hold / step;
            const double rounded = std::round(ratio);
            if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * ratio)
                throw std::runtime_error(
                    "make_signal: hold interval must be an integer multiple of the grid step");
            Rng rng(spec.seed);
            long long have = -1;
            double current = 0.0;
            for (Eigen::Index k = 0; k < count; ++k) {
                const long long idx = static_cast<long long>(k) / static_cast<long long>(rounded);
                while (have < idx) {
                    current = spec.mean + spec.stddev * rng.normal();
                    ++have;
                }
                out[k] = current;
            }
            break;
        }
    }
    return out;
}

}  // namespace ctsid
