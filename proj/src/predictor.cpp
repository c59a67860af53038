#include "ctsid/predictor.hpp"

#include "ctsid/discretize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctsid {
namespace {

constexpr double kDivergeLimit = 1e12;

ResidualSeries diverged_series(Eigen::Index N, Eigen::Index at) {
    ResidualSeries r;
    r.e = Eigen::VectorXd::Zero(N);
    r.diverged = true;
    r.first_bad_index = at;
    return r;
}

// Generic held-input recursion z+ = F z + Bu u_k + By y_k, e_k = y_k - Cz z_k.
ResidualSeries propagate(const Eigen::MatrixXd& F, const Eigen::MatrixXd& Bu,
                         const Eigen::MatrixXd& By, const Eigen::RowVectorXd& Cz,
                         const Eigen::VectorXd& z0, const DataSet& data,
                         Eigen::RowVectorXd d_row = {}, Eigen::VectorXd* d_trace = nullptr) {
    const Eigen::Index N = data.size();
    ResidualSeries r;
    r.e.resize(N);
    if (d_trace) d_trace->resize(N);
    Eigen::VectorXd z = z0;
    for (Eigen::Index k = 0; k < N; ++k) {
        const double zmax = z.cwiseAbs().maxCoeff();
        if (!std::isfinite(zmax) || zmax > kDivergeLimit) {
            r.e.tail(N - k).setZero();
            if (d_trace) d_trace->tail(N - k).setZero();
            r.diverged = true;
            r.first_bad_index = k;
            return r;
        }
        r.e[k] = data.y[k] - Cz * z;
        if (d_trace) (*d_trace)[k] = d_row * z;
        if (k + 1 == N) break;
        z = F * z + Bu.col(0) * data.u[k] + By.col(0) * data.y[k];
    }
    return r;
}

}  // namespace

double ResidualSeries::cost() const {
    if (diverged) return std::numeric_limits<double>::infinity();
    return e.squaredNorm();
}

PredictorKind PredictorKind::oe() {
    return {};
}

PredictorKind PredictorKind::stabilized_oe(TransferFunction virtual_controller) {
    PredictorKind k;
    k.type = PredictorType::stabilized_oe;
    k.virtual_controller = std::move(virtual_controller);
    return k;
}

PredictorKind PredictorKind::fixed_pole_observer(PoleSet p_ob) {
    PredictorKind k;
    k.type = PredictorType::fixed_pole_observer;
    k.p_ob = std::move(p_ob);
    return k;
}

PredictorKind PredictorKind::fixed_pole_extended_observer(PoleSet p_ob) {
    PredictorKind k;
    k.type = PredictorType::fixed_pole_extended_observer;
    k.p_ob = std::move(p_ob);
    return k;
}

PredictorKind PredictorKind::free_gain_observer(Eigen::VectorXd gain0) {
    PredictorKind k;
    k.type = PredictorType::free_gain_observer;
    k.gain0 = std::move(gain0);
    return k;
}

void PredictorKind::validate(const ModelStructure& ms) const {
    switch (type) {
        case PredictorType::fixed_pole_observer:
            p_ob.validate();
            if (p_ob.size() != ms.n)
                throw std::runtime_error("predictor: fixed_pole_observer needs exactly n poles");
            break;
        case PredictorType::fixed_pole_extended_observer:
            p_ob.validate();
            if (p_ob.size() != ms.n + 1)
                throw std::runtime_error(
                    "predictor: fixed_pole_extended_observer needs exactly n+1 poles");
            break;
        case PredictorType::stabilized_oe:
            virtual_controller.normalized();  // throws if improper
            break;
        case PredictorType::free_gain_observer:
            if (gain0.size() != ms.n)
                throw std::runtime_error("predictor: free-gain vector must have n entries");
            break;
        case PredictorType::oe:
            break;
    }
}

const char* PredictorKind::name() const {
    switch (type) {
        case PredictorType::oe: return "oe";
        case PredictorType::stabilized_oe: return "stabilized_oe";
        case PredictorType::fixed_pole_observer: return "fixed_pole_observer";
        case PredictorType::fixed_pole_extended_observer: return "fixed_pole_extended_observer";
        case PredictorType::free_gain_observer: return "free_gain_observer";
    }
    return "?";
}

Eigen::Index PredictorKind::state_dim(const ModelStructure& ms) const {
    if (type == PredictorType::stabilized_oe) return ms.n + realize_proper(virtual_controller).order;
    return ms.n;
}

Eigen::Index PredictorKind::gain_dim(const ModelStructure& ms) const {
    return type == PredictorType::free_gain_observer ? ms.n : 0;
}

ResidualSeries oe_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                            const Eigen::VectorXd& x0, const DataSet& data) {
    const StateSpace ss = realize_ccf(ms, theta);
    if (!is_hurwitz(ss.A)) return diverged_series(data.size(), 0);
    return observer_residuals_with_gain(ss, Eigen::VectorXd::Zero(ms.n), x0, data);
}

ResidualSeries stabilized_oe_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                       const Eigen::VectorXd& x0_aug, const DataSet& data,
                                       const TransferFunction& virtual_controller) {
    const StateSpace ss = realize_ccf(ms, theta);
    const ProperRealization vc = realize_proper(virtual_controller);
    const Eigen::Index n = ss.order(), nk = vc.order;
    if (x0_aug.size() != n + nk)
        throw std::runtime_error("stabilized_oe_residuals: initial state length mismatch");

    // Prediction system: xhat' = A xhat + B(u + K(p)e), e = y - C xhat. The
    // continuous interconnection must be stable at this theta for the
    // predictor to be usable at all.
    Eigen::MatrixXd Acl = Eigen::MatrixXd::Zero(n + nk, n + nk);
    Acl.topLeftCorner(n, n) = ss.A - ss.B * vc.D * ss.C;
    if (nk > 0) {
        Acl.topRightCorner(n, nk) = ss.B * vc.ss.C;
        Acl.bottomLeftCorner(nk, n) = -vc.ss.B * ss.C;
        Acl.bottomRightCorner(nk, nk) = vc.ss.A;
    }
    if (!is_hurwitz(Acl)) return diverged_series(data.size(), 0);

    // Between samples the innovation is held at e_k = y_k - C xhat_k (same
    // convention as the observer predictors), so discretize the open path
    // z' = Abar z + Bu u + Be e by ZOH and close the feedback per step. This
    // keeps e identically zero at the true parameters on noise-free data.
    Eigen::MatrixXd Abar = Eigen::MatrixXd::Zero(n + nk, n + nk);
    Abar.topLeftCorner(n, n) = ss.A;
    Eigen::MatrixXd Bin = Eigen::MatrixXd::Zero(n + nk, 2);
    Bin.col(0).head(n) = ss.B;
    Bin.col(1).head(n) = ss.B * vc.D;
    if (nk > 0) {
        Abar.topRightCorner(n, nk) = ss.B * vc.ss.C;
        Abar.bottomRightCorner(nk, nk) = vc.ss.A;
        Bin.col(1).tail(nk) = vc.ss.B;
    }
    const auto [F0, Bd] = zoh_discretize(Abar, Bin, data.h);
    Eigen::RowVectorXd Cz = Eigen::RowVectorXd::Zero(n + nk);
    Cz.head(n) = ss.C;
    const Eigen::MatrixXd F = F0 - Bd.col(1) * Cz;
    return propagate(F, Bd.col(0), Bd.col(1), Cz, x0_aug, data);
}

ResidualSeries observer_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                  const Eigen::VectorXd& x0, const DataSet& data,
                                  const PoleSet& p_ob) {
    const StateSpace ss = realize_ccf(ms, theta);
    ObserverGain g;
    try {
        g = observer_gain(ss, p_ob);
    } catch (const std::runtime_error&) {
        // Unobservable or unverifiable placement at this theta: infinite cost
        // so an optimizer rejects the step instead of aborting the run.
        return diverged_series(data.size(), 0);
    }
    return observer_residuals_with_gain(ss, g.K_x, x0, data);
}

ResidualSeries extended_observer_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                           const Eigen::VectorXd& x0, double d0,
                                           const DataSet& data, const PoleSet& p_ob) {
    const StateSpace ss = realize_ccf(ms, theta);
    ObserverGain g;
    try {
        g = extended_observer_gain(ss, p_ob);
    } catch (const std::runtime_error&) {
        return diverged_series(data.size(), 0);
    }
    return extended_residuals_with_gain(ss, g.K_x, *g.K_d, x0, d0, data);
}

ResidualSeries free_gain_residuals(const ModelStructure& ms, const Eigen::VectorXd& theta,
                                   const Eigen::VectorXd& K_x, const Eigen::VectorXd& x0,
                                   const DataSet& data) {
    const StateSpace ss = realize_ccf(ms, theta);
    if (K_x.size() != ss.order())
        throw std::runtime_error("free_gain_residuals: gain length mismatch");
    return observer_residuals_with_gain(ss, K_x, x0, data);
}

ResidualSeries observer_residuals_with_gain(const StateSpace& ss, const Eigen::VectorXd& K_x,
                                            const Eigen::VectorXd& x0, const DataSet& data) {
    if (x0.size() != ss.order())
        throw std::runtime_error("observer residuals: initial state length mismatch");
    const auto [Ad, Bd] = zoh_discretize(ss, data.h);
    const Eigen::VectorXd L = zoh_input_integral(ss.A, data.h) * K_x;
    const Eigen::MatrixXd F = Ad - L * ss.C;
    // Stability of the matrix actually iterated (held innovation), not of the
    // continuous interconnection: near the one-step-tracker gain the two
    // disagree, and that region must be evaluable to expose its degeneracy.
    const Eigen::VectorXcd ev = eigenvalues(F);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (std::abs(ev[i]) >= 1.0) return diverged_series(data.size(), 0);
    return propagate(F, Bd, L, ss.C, x0, data);
}

ResidualSeries extended_residuals_with_gain(const StateSpace& ss, const Eigen::VectorXd& K_x,
                                            double K_d, const Eigen::VectorXd& x0, double d0,
                                            const DataSet& data, Eigen::VectorXd* d_trace) {
    const Eigen::Index n = ss.order();
    if (x0.size() != n)
        throw std::runtime_error("extended residuals: initial state length mismatch");
    // Augmented model: x' = A x + B(u + d) + K_x e, d' = K_d e.
    Eigen::MatrixXd Aa = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Aa.topLeftCorner(n, n) = ss.A;
    Aa.topRightCorner(n, 1) = ss.B;
    Eigen::VectorXd Ba = Eigen::VectorXd::Zero(n + 1);
    Ba.head(n) = ss.B;
    Eigen::RowVectorXd Ca = Eigen::RowVectorXd::Zero(n + 1);
    Ca.head(n) = ss.C;
    Eigen::VectorXd Ka(n + 1);
    Ka << K_x, K_d;

    const auto [Ad, Bd] = zoh_discretize(Aa, Ba, data.h);
    const Eigen::VectorXd La = zoh_input_integral(Aa, data.h) * Ka;
    const Eigen::MatrixXd F = Ad - La * Ca;
    Eigen::VectorXd z0(n + 1);
    z0 << x0, d0;
    Eigen::RowVectorXd d_row = Eigen::RowVectorXd::Zero(n + 1);
    d_row[n] = 1.0;
    return propagate(F, Bd, La, Ca, z0, data, d_row, d_trace);
}

ResidualSeries predictor_residuals(const ModelStructure& ms, const PredictorKind& kind,
                                   const Eigen::VectorXd& theta, const Eigen::VectorXd& x0,
                                   double d0, const Eigen::VectorXd& gain, const DataSet& data) {
    switch (kind.type) {
        case PredictorType::oe:
            return oe_residuals(ms, theta, x0, data);
        case PredictorType::stabilized_oe:
            return stabilized_oe_residuals(ms, theta, x0, data, kind.virtual_controller);
        case PredictorType::fixed_pole_observer:
            return observer_residuals(ms, theta, x0, data, kind.p_ob);
        case PredictorType::fixed_pole_extended_observer:
            return extended_observer_residuals(ms, theta, x0, d0, data, kind.p_ob);
        case PredictorType::free_gain_observer:
            return free_gain_residuals(ms, theta, gain, x0, data);
    }
    throw std::runtime_error("predictor_residuals: unknown kind");
}

}  // namespace ctsid
