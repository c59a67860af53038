#include "ctsid/estimator.hpp"

#include "ctsid/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctsid {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double series_cost(const ResidualSeries& r) {
    return r.cost();
}

struct KindLayout {
    Eigen::Index n_theta, n_state, n_d, n_gain;
    Eigen::Index total() const { return n_theta + n_state + n_d + n_gain; }
};

KindLayout layout_for(const ModelStructure& ms, const PredictorKind& kind) {
    if (kind.pin_initial_states) return {ms.n_theta(), 0, 0, kind.gain_dim(ms)};
    return {ms.n_theta(), kind.state_dim(ms), kind.has_d() ? 1 : 0, kind.gain_dim(ms)};
}

}  // namespace

void LMOptions::validate() const {
    if (max_iterations < 1 || cost_tolerance <= 0.0 || step_tolerance <= 0.0 || lambda0 <= 0.0 ||
        fd_rel_step <= 0.0 || lambda_up <= 1.0 || lambda_down <= 0.0 || lambda_down >= 1.0)
        throw std::runtime_error("LM options: all entries must be positive with up > 1 > down");
}

LMRun levenberg_marquardt(const ResidualFn& residual_fn, const Eigen::VectorXd& v0,
                          const LMOptions& opts) {
    opts.validate();
    LMRun run;
    run.v = v0;
    ResidualSeries res = residual_fn(run.v);
    run.cost = series_cost(res);
    if (!std::isfinite(run.cost))
        throw std::runtime_error(
            "levenberg_marquardt: initial point has infinite cost (diverged or infeasible); "
            "try multi_start with different initial parameters");
    run.cost_trace.push_back(run.cost);
    run.termination = "max_iterations";
    if (run.cost == 0.0) {
        run.termination = "zero_cost";
        return run;
    }

    const Eigen::Index nv = v0.size();
    const Eigen::Index ne = res.e.size();
    double lambda = opts.lambda0;

    for (int it = 0; it < opts.max_iterations; ++it) {
        run.iterations = it + 1;
        // Forward-difference Jacobian; fall back to backward difference when the
        // forward point diverges, or a zero column when both sides do.
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(ne, nv);
        for (Eigen::Index i = 0; i < nv; ++i) {
            const double d = opts.fd_rel_step * (1.0 + std::abs(run.v[i]));
            Eigen::VectorXd vp = run.v;
            vp[i] += d;
            const ResidualSeries rp = residual_fn(vp);
            if (!rp.diverged) {
                J.col(i) = (rp.e - res.e) / d;
                continue;
            }
            vp[i] = run.v[i] - d;
            const ResidualSeries rm = residual_fn(vp);
            if (!rm.diverged) J.col(i) = (res.e - rm.e) / d;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd Jte = J.transpose() * res.e;

        bool accepted = false;
        for (int tries = 0; tries < 50; ++tries) {
            Eigen::MatrixXd Dm = JtJ;
            Dm.diagonal() += lambda * JtJ.diagonal();
            const Eigen::VectorXd delta = -Dm.ldlt().solve(Jte);
            if (!delta.allFinite()) {
                lambda *= opts.lambda_up;
                continue;
            }
            const Eigen::VectorXd vn = run.v + delta;
            const ResidualSeries rn = residual_fn(vn);
            const double cn = series_cost(rn);
            if (cn < run.cost) {
                const double rel = (run.cost - cn) / run.cost;
                const double step = delta.norm() / (1.0 + run.v.norm());
                run.v = vn;
                res = rn;
                run.cost = cn;
                run.cost_trace.push_back(cn);
                ++run.accepted_steps;
                lambda = std::max(lambda * opts.lambda_down, 1e-12);
                accepted = true;
                // A relative-decrease test is only meaningful in the trust
                // region lambda <= lambda0; damped crawl steps would otherwise
                // stop the solver far from a stationary point.
                if (rel < opts.cost_tolerance && lambda <= opts.lambda0)
                    run.termination = "cost_tolerance";
                else if (step < opts.step_tolerance)
                    run.termination = "step_tolerance";
                break;
            }
            lambda *= opts.lambda_up;
        }
        if (!accepted) {
            run.termination = "no_acceptable_step";
            return run;
        }
        if (run.termination != "max_iterations") return run;
    }
    return run;
}

EstimationResult estimate(const ModelStructure& ms, const DataSet& data, const PredictorKind& kind,
                          const Eigen::VectorXd& theta0, const LMOptions& opts) {
    kind.validate(ms);
    if (theta0.size() != ms.n_theta())
        throw std::runtime_error("estimate: theta0 length mismatch");
    const KindLayout lay = layout_for(ms, kind);

    Eigen::VectorXd v0 = Eigen::VectorXd::Zero(lay.total());
    v0.head(lay.n_theta) = theta0;
    if (lay.n_gain > 0) v0.tail(lay.n_gain) = kind.gain0;

    const ResidualFn resfun = [&](const Eigen::VectorXd& v) -> ResidualSeries {
        const Eigen::VectorXd theta = v.head(lay.n_theta);
        const Eigen::VectorXd x0 = lay.n_state
                                       ? Eigen::VectorXd(v.segment(lay.n_theta, lay.n_state))
                                       : Eigen::VectorXd::Zero(kind.state_dim(ms));
        const double d0 = lay.n_d ? v[lay.n_theta + lay.n_state] : 0.0;
        const Eigen::VectorXd gain = lay.n_gain ? Eigen::VectorXd(v.tail(lay.n_gain))
                                                : Eigen::VectorXd();
        try {
            return predictor_residuals(ms, kind, theta, x0, d0, gain, data);
        } catch (const std::runtime_error&) {
            // Placement failures (unobservable theta, residual above tolerance)
            // count as infinite cost: the step is rejected, the solver backs out.
            ResidualSeries bad;
            bad.e = Eigen::VectorXd::Zero(data.size());
            bad.diverged = true;
            bad.first_bad_index = 0;
            return bad;
        }
    };

    const LMRun run = levenberg_marquardt(resfun, v0, opts);
    EstimationResult out;
    out.v = run.v;
    out.theta = run.v.head(lay.n_theta);
    out.x0 = lay.n_state ? Eigen::VectorXd(run.v.segment(lay.n_theta, lay.n_state))
                         : Eigen::VectorXd::Zero(kind.state_dim(ms));
    if (lay.n_d) out.d0 = run.v[lay.n_theta + lay.n_state];
    if (lay.n_gain) out.gain = run.v.tail(lay.n_gain);
    out.cost = run.cost;
    out.iterations = run.iterations;
    out.accepted_steps = run.accepted_steps;
    out.termination = run.termination;
    out.cost_trace = run.cost_trace;
    return out;
}

MultiStartResult multi_start(const ModelStructure& ms, const DataSet& data,
                             const PredictorKind& kind, const std::vector<Eigen::VectorXd>& starts,
                             const LMOptions& opts) {
    if (starts.empty()) throw std::runtime_error("multi_start: need at least one start");
    MultiStartResult out;
    double best_cost = kInf;
    for (size_t i = 0; i < starts.size(); ++i) {
        StartSummary s;
        s.theta0 = starts[i];
        try {
            const EstimationResult r = estimate(ms, data, kind, starts[i], opts);
            s.feasible = true;
            s.cost = r.cost;
            s.termination = r.termination;
            if (r.cost < best_cost) {
                best_cost = r.cost;
                out.best = r;
                out.best_index = static_cast<int>(i);
            }
        } catch (const std::runtime_error& err) {
            s.feasible = false;
            s.cost = kInf;
            s.termination = err.what();
        }
        out.starts.push_back(std::move(s));
    }
    if (out.best_index < 0)
        throw std::runtime_error("multi_start: every start was infeasible");
    return out;
}

Eigen::VectorXd default_theta_sampler(const ModelStructure& ms, double rms_u, double rms_y,
                                      Rng& rng) {
    std::vector<std::complex<double>> rts;
    int remaining = ms.n;
    double log_mag_sum = 0.0;
    while (remaining > 0) {
        const double mag = std::exp(rng.uniform(std::log(0.1), std::log(100.0)));
        const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        if (remaining >= 2 && rng.uniform01() < 0.5) {
            const double phi = rng.uniform(0.2, 1.37);  // keep away from both axes
            rts.emplace_back(sign * mag * std::cos(phi), mag * std::sin(phi));
            rts.emplace_back(sign * mag * std::cos(phi), -mag * std::sin(phi));
            log_mag_sum += 2.0 * std::log(mag);
            remaining -= 2;
        } else {
            rts.emplace_back(sign * mag, 0.0);
            log_mag_sum += std::log(mag);
            remaining -= 1;
        }
    }
    const Polynomial den = poly_from_complex_roots(rts, 1e-9);
    const double gain = rms_y / std::max(rms_u, 1e-12);
    const double wg = std::exp(log_mag_sum / ms.n);  // geometric mean root magnitude
    const double a0 = std::max(std::abs(den.c[0]), 1e-12);

    Eigen::VectorXd theta(ms.n_theta());
    theta.head(ms.n) = den.descending().tail(ms.n);
    Eigen::VectorXd num_asc(ms.m + 1);
    for (int j = 0; j <= ms.m; ++j) {
        const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        num_asc[j] = sign * gain * a0 / std::pow(wg, j);
    }
    theta.tail(ms.m + 1) = num_asc.reverse();
    return theta;
}

std::vector<EquationErrorCandidate> equation_error_candidates(const ModelStructure& ms,
                                                              const DataSet& data) {
    static const double kLambdaGrid[] = {1.0, 3.162, 10.0, 31.62, 100.0, 316.2};
    const Eigen::Index N = data.size();
    const int n = ms.n, m = ms.m;
    if (N < 4 * (n + m + 1)) throw std::runtime_error("equation_error: too few samples");
    const Eigen::VectorXd uc = data.u.array() - data.u.mean();
    const Eigen::VectorXd yc = data.y.array() - data.y.mean();

    std::vector<EquationErrorCandidate> out;
    for (const double lam : kLambdaGrid) {
        if (lam * data.h > 1.5) continue;  // filter far beyond Nyquist: skip
        // State-variable filter 1/(p+lam)^n: CCF states carry p^j/(p+lam)^n sig.
        std::vector<std::complex<double>> fr(static_cast<size_t>(n), {-lam, 0.0});
        const Polynomial fden = poly_from_complex_roots(fr, 1e-12);
        StateSpace filt;
        filt.A = companion(fden);
        filt.B = Eigen::VectorXd::Zero(n);
        filt.B[n - 1] = 1.0;
        filt.C = Eigen::RowVectorXd::Zero(n);
        const auto [Ad, Bd] = zoh_discretize(filt, data.h);

        auto filter_states = [&](const Eigen::VectorXd& sig) {
            Eigen::MatrixXd X(N, n);
            Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
            for (Eigen::Index k = 0; k < N; ++k) {
                X.row(k) = x.transpose();
                x = Ad * x + Bd * sig[k];
            }
            return X;
        };
        const Eigen::MatrixXd Xu = filter_states(uc);
        const Eigen::MatrixXd Xy = filter_states(yc);

        // p^n y_f = y - a . (p^j y_f), with a the ascending coefficients of
        // (p+lam)^n below the monic term.
        const Eigen::VectorXd a = fden.c.head(n);
        const Eigen::VectorXd target = yc - Xy * a;
        Eigen::MatrixXd Phi(N, n + m + 1);
        Phi.leftCols(n) = -Xy;
        Phi.rightCols(m + 1) = Xu.leftCols(m + 1);

        const Eigen::VectorXd sol = Phi.colPivHouseholderQr().solve(target);
        const double resid = (Phi * sol - target).norm() / std::max(target.norm(), 1e-300);

        // sol = [den ascending below monic, num ascending]; convert to theta.
        EquationErrorCandidate c;
        c.theta.resize(ms.n_theta());
        c.theta.head(n) = sol.head(n).reverse();
        c.theta.tail(m + 1) = sol.tail(m + 1).reverse();
        c.lambda = lam;
        c.residual = resid;
        out.push_back(std::move(c));
    }
    if (out.empty()) throw std::runtime_error("equation_error: no usable filter bandwidth");
    std::sort(out.begin(), out.end(),
              [](const EquationErrorCandidate& a, const EquationErrorCandidate& b) {
                  return a.residual < b.residual;
              });
    return out;
}

Eigen::VectorXd equation_error_start(const ModelStructure& ms, const DataSet& data) {
    return equation_error_candidates(ms, data).front().theta;
}

Eigen::VectorXd stabilize_denominator(const ModelStructure& ms, const Eigen::VectorXd& theta) {
    if (theta.size() != ms.n_theta())
        throw std::runtime_error("stabilize_denominator: theta length mismatch");
    Eigen::VectorXd den_desc(ms.n + 1);
    den_desc[0] = 1.0;
    den_desc.tail(ms.n) = theta.head(ms.n);
    std::vector<std::complex<double>> r = roots(Polynomial::from_descending(den_desc));
    for (auto& z : r) {
        if (z.real() > 0.0) z = {-z.real(), z.imag()};
        else if (z.real() == 0.0) z = {-1e-6 * (1.0 + std::abs(z)), z.imag()};
    }
    const Polynomial stab = poly_from_complex_roots(r, 1e-6);
    Eigen::VectorXd out = theta;
    out.head(ms.n) = stab.monic().descending().tail(ms.n);
    return out;
}

}  // namespace ctsid
