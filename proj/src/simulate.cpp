#include "ctsid/simulate.hpp"

#include "ctsid/discretize.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace ctsid {
namespace {

constexpr double kDivergeLimit = 1e12;

// Controller as exact ZOH discretization (+ direct term) at the sample step.
struct DigitalController {
    Eigen::MatrixXd Ad;
    Eigen::VectorXd Bd;
    Eigen::RowVectorXd C;
    double D = 0.0;
    Eigen::Index order = 0;
};

DigitalController discretize_controller(const ProperRealization& k, double h) {
    DigitalController d;
    d.D = k.D;
    d.order = k.order;
    if (k.order > 0) {
        d.C = k.ss.C;
        const auto [Ad, Bd] = zoh_discretize(k.ss, h);
        d.Ad = Ad;
        d.Bd = Bd;
    }
    return d;
}

// Smallest integer refinement L of the sample step such that every signal time
// scale is an integer multiple of h/L ("discretize at the finest hold").
int grid_refinement(const LoopSignals& signals, double h) {
    const double scales[] = {signals.r_u.time_scale(), signals.r_y.time_scale(),
                             signals.w.time_scale(), signals.eta.time_scale()};
    for (int L = 1; L <= 1024; ++L) {
        const double g = h / L;
        bool ok = true;
        for (const double s : scales) {
            if (s <= 0.0) continue;
            const double ratio = s / g;
            if (std::abs(ratio - std::round(ratio)) > 1e-6 * ratio) ok = false;
        }
        if (ok) return L;
    }
    throw std::runtime_error(
        "simulate_closed_loop: signal hold intervals are not commensurate with the sampling time");
}

void check_finite(double t, const Eigen::VectorXd& xp, const Eigen::VectorXd& xc) {
    const double mp = xp.size() ? xp.cwiseAbs().maxCoeff() : 0.0;
    const double mc = xc.size() ? xc.cwiseAbs().maxCoeff() : 0.0;
    const double m = std::max(mp, mc);
    if (!std::isfinite(m) || m > kDivergeLimit)
        throw DivergenceError("simulate_closed_loop: state diverged at t = " +
                              std::to_string(t) + " s");
}

struct LoopRun {
    Eigen::VectorXd u, y;
};

LoopRun run_loop(const StateSpace& plant, const Eigen::MatrixXd& Adp, const Eigen::VectorXd& Bdp,
                 const DigitalController& ctrl, const LoopSignals& signals, double h, int L,
                 Eigen::Index total) {
    const double g = h / L;
    const Eigen::VectorXd r_u = make_signal(signals.r_u, h, total);
    const Eigen::VectorXd r_y = make_signal(signals.r_y, h, total);
    const Eigen::VectorXd eta = make_signal(signals.eta, h, total);
    const Eigen::VectorXd w =
        make_signal(signals.w, g, total > 0 ? (total - 1) * L + 1 : 0);

    LoopRun out;
    out.u.resize(total);
    out.y.resize(total);
    Eigen::VectorXd xp = Eigen::VectorXd::Zero(plant.order());
    Eigen::VectorXd xc = Eigen::VectorXd::Zero(ctrl.order);
    for (Eigen::Index k = 0; k < total; ++k) {
        const double y_clean = plant.C * xp;
        const double y_meas = y_clean + eta[k];
        const double err = r_y[k] - y_meas;
        double u = r_u[k] + ctrl.D * err;
        if (ctrl.order > 0) u += ctrl.C * xc;
        out.u[k] = u;
        out.y[k] = y_meas;
        check_finite(static_cast<double>(k) * h, xp, xc);
        if (k + 1 == total) break;
        if (ctrl.order > 0) xc = ctrl.Ad * xc + ctrl.Bd * err;
        for (int j = 0; j < L; ++j) xp = Adp * xp + Bdp * (u + w[k * L + j]);
    }
    return out;
}

}  // namespace

LoopSignals LoopSignals::noise_free() const {
    // References are kept (they are known excitation, however they were
    // generated); the disturbance and measurement-noise channels are removed.
    return {r_u, r_y, SignalSpec::zero(), SignalSpec::zero()};
}

Eigen::MatrixXd closed_loop_matrix(const TransferFunction& plant,
                                   const TransferFunction& controller) {
    const StateSpace p = realize_ccf(plant);
    const ProperRealization k = realize_proper(controller);
    const Eigen::Index np = p.order(), nc = k.order;
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(np + nc, np + nc);
    A.topLeftCorner(np, np) = p.A - p.B * k.D * p.C;
    if (nc > 0) {
        A.topRightCorner(np, nc) = p.B * k.ss.C;
        A.bottomLeftCorner(nc, np) = -k.ss.B * p.C;
        A.bottomRightCorner(nc, nc) = k.ss.A;
    }
    return A;
}

DataSet simulate_closed_loop(const TransferFunction& plant, const TransferFunction& controller,
                             const LoopSignals& signals, double h, Eigen::Index N,
                             Eigen::Index warmup, bool want_shadows) {
    if (!(h > 0.0)) throw std::runtime_error("simulate_closed_loop: sampling time must be > 0");
    if (N < 1) throw std::runtime_error("simulate_closed_loop: N must be >= 1");
    if (warmup < 0) throw std::runtime_error("simulate_closed_loop: warmup must be >= 0");

    const StateSpace p = realize_ccf(plant);  // rejects non-strictly-proper plants
    const DigitalController ctrl = discretize_controller(realize_proper(controller), h);
    const int L = grid_refinement(signals, h);
    const auto [Adp, Bdp] = zoh_discretize(p, h / L);

    const Eigen::Index total = N + warmup;
    const LoopRun noisy = run_loop(p, Adp, Bdp, ctrl, signals, h, L, total);

    DataSet data;
    data.h = h;
    data.u = noisy.u.tail(N);
    data.y = noisy.y.tail(N);
    if (want_shadows) {
        const LoopRun clean = run_loop(p, Adp, Bdp, ctrl, signals.noise_free(), h, L, total);
        data.has_shadows = true;
        data.u0 = clean.u.tail(N);
        data.y0 = clean.y.tail(N);
    }
    return data;
}

}  // namespace ctsid
