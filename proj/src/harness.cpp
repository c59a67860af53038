#include "ctsid/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctsid {
namespace {

// (p + a)
Polynomial linear_factor(double a) {
    return Polynomial((Eigen::VectorXd(2) << a, 1.0).finished());
}

// (p - re)^2 + im^2, the real quadratic with roots re +- i*im
Polynomial quad_factor(double re, double im) {
    return Polynomial((Eigen::VectorXd(3) << re * re + im * im, -2.0 * re, 1.0).finished());
}

std::complex<double> cplx(double re, double im) { return {re, im}; }

double demeaned_rms(const Eigen::VectorXd& x) {
    if (x.size() == 0) return 0.0;
    const Eigen::VectorXd c = x.array() - x.mean();
    return std::sqrt(c.squaredNorm() / static_cast<double>(x.size()));
}

}  // namespace

Scenario Scenario::noise_free() const {
    Scenario sc = *this;
    sc.w = SignalSpec::zero();
    sc.eta = SignalSpec::zero();
    return sc;
}

Scenario scenario_a() {
    Scenario sc;
    sc.name = "A";
    sc.ms = ModelStructure(3, 0);
    sc.theta_star = (Eigen::VectorXd(4) << 13.33, -494.4, -6593.0, 7148.0).finished();
    const Polynomial knum =
        1.197e5 * (linear_factor(9.294) * linear_factor(13.99) * linear_factor(20.9));
    const Polynomial kden =
        linear_factor(399.9) * linear_factor(0.1) * quad_factor(-121.5, 141.1);
    sc.controller = TransferFunction(knum, kden);
    sc.r_u = SignalSpec::zero();
    sc.r_y = SignalSpec::square_wave(1.0, 0.5);
    sc.w = SignalSpec::zoh_gaussian(0.0, 0.5, 1e-4);
    sc.eta = SignalSpec::zoh_gaussian(0.0, 0.5, 1e-4);
    sc.h = 1e-4;
    sc.N = 5000;
    sc.warmup = 10000;
    sc.kind = PredictorKind::fixed_pole_observer(
        PoleSet({cplx(-3, 0), cplx(-3, 1), cplx(-3, -1)}));
    return sc;
}

Scenario scenario_b() {
    Scenario sc;
    sc.name = "B";
    sc.ms = ModelStructure(4, 1);
    sc.theta_star = (Eigen::VectorXd(6) << 5.0, 408.0, 416.0, 1600.0, -6400.0, 1600.0).finished();
    sc.controller = TransferFunction::zero();  // open loop
    sc.r_u = SignalSpec::zoh_gaussian(0.0, 1.0, 0.05);
    sc.r_y = SignalSpec::zero();
    sc.w = SignalSpec::constant(10.0);
    sc.eta = SignalSpec::zoh_gaussian(0.0, 0.4, 1e-3);
    sc.h = 1e-3;
    sc.N = 20000;
    sc.warmup = 0;
    sc.kind = PredictorKind::fixed_pole_extended_observer(
        PoleSet({cplx(-3, 0), cplx(-3, 1), cplx(-3, -1), cplx(-3, 0.5), cplx(-3, -0.5)}));
    // The cost surface has a deceptive valley near zero numerator (a high-gain
    // output tracker) whose basin captures the best-residual equation-error
    // candidates; neither the equation-error residual nor the initial
    // prediction cost ranks candidates by basin quality here, so every filter
    // bandwidth on the grid gets a start (infeasible ones are skipped).
    sc.ee_starts = 6;
    sc.random_starts = 2;
    return sc;
}

Scenario scenario_c() {
    Scenario sc = scenario_a();
    sc.name = "C";
    sc.w = SignalSpec::constant(1.0);
    sc.kind = PredictorKind::fixed_pole_extended_observer(
        PoleSet({cplx(-3, 1), cplx(-3, -1), cplx(-3, 0.5), cplx(-3, -0.5)}));
    return sc;
}

Scenario scenario_by_name(const std::string& name) {
    if (name == "A" || name == "a") return scenario_a();
    if (name == "B" || name == "b") return scenario_b();
    if (name == "C" || name == "c") return scenario_c();
    throw std::runtime_error("unknown scenario '" + name + "' (expected A, B, or C)");
}

DataSet generate_trial_data(const Scenario& sc, std::uint64_t trial, bool want_shadows) {
    LoopSignals sig;
    sig.r_u = sc.r_u.with_seed(stream_seed(sc.base_seed, trial, kStreamRu));
    sig.r_y = sc.r_y.with_seed(stream_seed(sc.base_seed, trial, kStreamRy));
    sig.w = sc.w.with_seed(stream_seed(sc.base_seed, trial, kStreamW));
    sig.eta = sc.eta.with_seed(stream_seed(sc.base_seed, trial, kStreamEta));
    return simulate_closed_loop(sc.plant(), sc.controller, sig, sc.h, sc.N, sc.warmup,
                                want_shadows);
}

std::vector<Eigen::VectorXd> build_starts(const ModelStructure& ms, const PredictorKind& kind,
                                          const DataSet& data, std::uint64_t base_seed,
                                          std::uint64_t trial, int ee_starts, int random_starts) {
    // oe/stabilized_oe require a stable model denominator at the start; the
    // observer kinds place their own poles regardless.
    const bool needs_stable =
        kind.type == PredictorType::oe || kind.type == PredictorType::stabilized_oe;
    std::vector<Eigen::VectorXd> starts;
    try {
        const auto cands = equation_error_candidates(ms, data);
        const int take = std::min<int>(ee_starts, static_cast<int>(cands.size()));
        for (int i = 0; i < take; ++i) {
            Eigen::VectorXd th = cands[i].theta;
            if (needs_stable) th = stabilize_denominator(ms, th);
            starts.push_back(th);
        }
    } catch (const std::exception&) {
        // no usable equation-error start; fall back to the random draws
    }
    const double rms_u = demeaned_rms(data.u);
    const double rms_y = demeaned_rms(data.y);
    for (int j = 0; j < random_starts; ++j) {
        Rng rng(stream_seed(base_seed, trial, 4 + static_cast<std::uint64_t>(j)));
        Eigen::VectorXd th = default_theta_sampler(ms, rms_u, rms_y, rng);
        if (needs_stable) th = stabilize_denominator(ms, th);
        starts.push_back(th);
    }
    return starts;
}

std::vector<Eigen::VectorXd> trial_starts(const Scenario& sc, const DataSet& data,
                                          std::uint64_t trial) {
    return build_starts(sc.ms, sc.kind, data, sc.base_seed, trial, sc.ee_starts,
                        sc.random_starts);
}

Eigen::VectorXd column_quantile(const Eigen::MatrixXd& table, double p) {
    if (table.rows() == 0) throw std::runtime_error("quantile of an empty table");
    if (!(p >= 0.0 && p <= 1.0)) throw std::runtime_error("quantile level must be in [0, 1]");
    Eigen::VectorXd out(table.cols());
    std::vector<double> col(static_cast<std::size_t>(table.rows()));
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
        for (Eigen::Index i = 0; i < table.rows(); ++i)
            col[static_cast<std::size_t>(i)] = table(i, j);
        std::sort(col.begin(), col.end());
        const double pos = p * static_cast<double>(col.size() - 1);
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        out[j] = (lo + 1 < col.size()) ? col[lo] + frac * (col[lo + 1] - col[lo]) : col[lo];
    }
    return out;
}

Eigen::VectorXd median_abs_rel_error(const Eigen::MatrixXd& table,
                                     const Eigen::VectorXd& theta_star) {
    if (table.cols() != theta_star.size())
        throw std::runtime_error("estimate table and reference parameter sizes differ");
    Eigen::MatrixXd rel = (table.rowwise() - theta_star.transpose()).cwiseAbs();
    rel.array().rowwise() /= theta_star.cwiseAbs().transpose().array();
    return column_quantile(rel, 0.5);
}

TrialStats run_monte_carlo(const Scenario& sc, int trials, const LMOptions& opts) {
    if (trials < 1) throw std::runtime_error("trial count must be positive");
    sc.kind.validate(sc.ms);
    TrialStats st;
    st.records.reserve(static_cast<std::size_t>(trials));
    for (std::uint64_t trial = 0; trial < static_cast<std::uint64_t>(trials); ++trial) {
        TrialRecord rec;
        rec.trial = trial;
        try {
            const DataSet data = generate_trial_data(sc, trial, false);
            const auto starts = trial_starts(sc, data, trial);
            const auto run = multi_start(sc.ms, data, sc.kind, starts, opts);
            rec.ok = true;
            rec.theta = run.best.theta;
            rec.cost = run.best.cost;
            rec.termination = run.best.termination;
            rec.start_index = run.best_index;
        } catch (const std::exception& ex) {
            rec.error = ex.what();
        }
        st.records.push_back(std::move(rec));
    }
    Eigen::Index ok = 0;
    for (const auto& r : st.records) ok += r.ok ? 1 : 0;
    st.n_failed = trials - static_cast<int>(ok);
    st.theta_table.resize(ok, sc.ms.n_theta());
    Eigen::Index row = 0;
    for (const auto& r : st.records)
        if (r.ok) st.theta_table.row(row++) = r.theta.transpose();
    if (ok > 0) {
        st.median = column_quantile(st.theta_table, 0.5);
        st.q1 = column_quantile(st.theta_table, 0.25);
        st.q3 = column_quantile(st.theta_table, 0.75);
        st.min = st.theta_table.colwise().minCoeff();
        st.max = st.theta_table.colwise().maxCoeff();
    }
    return st;
}

std::vector<SweepRow> pole_sensitivity_sweep(const Scenario& sc,
                                             const std::vector<double>& real_parts, int trials,
                                             const LMOptions& opts) {
    if (sc.kind.type != PredictorType::fixed_pole_observer &&
        sc.kind.type != PredictorType::fixed_pole_extended_observer)
        throw std::runtime_error("pole sweep needs a fixed-pole predictor kind");
    if (real_parts.empty()) throw std::runtime_error("pole sweep needs at least one real part");
    std::vector<SweepRow> rows;
    rows.reserve(real_parts.size());
    for (const double rp : real_parts) {
        Scenario swept = sc;
        swept.kind.p_ob = sc.kind.p_ob.with_real_parts(rp);
        swept.kind.p_ob.validate();  // rejects rp >= 0 up front
        const TrialStats st = run_monte_carlo(swept, trials, opts);
        SweepRow row;
        row.real_part = rp;
        row.n_failed = st.n_failed;
        if (st.theta_table.rows() > 0) row.median = st.median;
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

// Magnitude in dB and phase in degrees, unwrapped along the grid; non-finite
// response points stay non-finite (flagged, never fatal).
void mag_phase(const Eigen::VectorXcd& resp, Eigen::Ref<Eigen::VectorXd> mag_db,
               Eigen::Ref<Eigen::VectorXd> phase_deg) {
    constexpr double kPi = 3.14159265358979323846;
    double prev = 0.0;
    bool have_prev = false;
    for (Eigen::Index k = 0; k < resp.size(); ++k) {
        const std::complex<double> hk = resp[k];
        if (!std::isfinite(hk.real()) || !std::isfinite(hk.imag())) {
            mag_db[k] = std::numeric_limits<double>::quiet_NaN();
            phase_deg[k] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        mag_db[k] = 20.0 * std::log10(std::abs(hk));
        double ph = std::arg(hk);
        if (have_prev) ph += 2.0 * kPi * std::round((prev - ph) / (2.0 * kPi));
        prev = ph;
        have_prev = true;
        phase_deg[k] = ph * 180.0 / kPi;
    }
}

}  // namespace

BodeTable bode_table(const TransferFunction& true_tf,
                     const std::vector<Eigen::VectorXd>& estimates, const ModelStructure& ms,
                     const Eigen::VectorXd& omega) {
    if (omega.size() == 0) throw std::runtime_error("frequency grid is empty");
    BodeTable bt;
    bt.omega = omega;
    bt.true_mag_db.resize(omega.size());
    bt.true_phase_deg.resize(omega.size());
    mag_phase(freq_response(true_tf, omega), bt.true_mag_db, bt.true_phase_deg);
    bt.est_mag_db.resize(omega.size(), static_cast<Eigen::Index>(estimates.size()));
    bt.est_phase_deg.resize(omega.size(), static_cast<Eigen::Index>(estimates.size()));
    for (std::size_t j = 0; j < estimates.size(); ++j) {
        const TransferFunction tf = theta_to_tf(ms, estimates[j]);
        mag_phase(freq_response(tf, omega), bt.est_mag_db.col(static_cast<Eigen::Index>(j)),
                  bt.est_phase_deg.col(static_cast<Eigen::Index>(j)));
    }
    return bt;
}

Eigen::VectorXd log_grid(double lo, double hi, Eigen::Index points) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::runtime_error("log grid needs 0 < lo < hi");
    if (points < 2) throw std::runtime_error("log grid needs at least two points");
    Eigen::VectorXd w(points);
    const double llo = std::log10(lo), lhi = std::log10(hi);
    for (Eigen::Index k = 0; k < points; ++k)
        w[k] = std::pow(10.0, llo + (lhi - llo) * static_cast<double>(k) /
                                  static_cast<double>(points - 1));
    return w;
}

}  // namespace ctsid
