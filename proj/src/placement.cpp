#include "ctsid/placement.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ctsid {
namespace {

constexpr double kConjTol = 1e-12;
constexpr double kObsTol = 1e-10;    // relative observability-rank tolerance
constexpr double kPlaceTol = 1e-8;   // max acceptable placed-pole error
constexpr double kRefineStop = 1e-11;
constexpr int kRefineIters = 10;

std::vector<std::complex<double>> to_vector(const Eigen::VectorXcd& v) {
    std::vector<std::complex<double>> out(static_cast<size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<size_t>(i)] = v[i];
    return out;
}

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// phi(A) * q by Horner applied to the vector, in extended precision; the
// intermediate companion-matrix powers lose too many digits in double at n = 8.
VecL horner_apply(const Polynomial& phi, const MatL& A, const VecL& q) {
    VecL v = VecL::Zero(q.size());
    for (int i = phi.degree(); i >= 0; --i)
        v = A * v + static_cast<long double>(phi.c[i]) * q;
    return v;
}

// Parlett-Reinsch balancing (exact powers of two), extended precision.
MatL balance_ld(MatL A) {
    const Eigen::Index n = A.rows();
    const long double radix = 2.0L, sq = radix * radix;
    bool again = true;
    while (again) {
        again = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            long double r = 0.0L, c = 0.0L;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(A(j, i));
                r += std::abs(A(i, j));
            }
            if (c == 0.0L || r == 0.0L) continue;
            long double f = 1.0L;
            const long double s = c + r;
            while (c < r / radix) { f *= radix; c *= sq; }
            while (c > r * radix) { f /= radix; c /= sq; }
            if ((c + r) / f < 0.95L * s) {
                again = true;
                A.row(i) *= 1.0L / f;
                A.col(i) *= f;
            }
        }
    }
    return A;
}

std::vector<std::complex<double>> eigenvalues_ld(const MatL& A) {
    const Eigen::EigenSolver<MatL> es(balance_ld(A), false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalue iteration failed to converge");
    std::vector<std::complex<double>> out(static_cast<size_t>(A.rows()));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        out[static_cast<size_t>(i)] = {static_cast<double>(es.eigenvalues()[i].real()),
                                       static_cast<double>(es.eigenvalues()[i].imag())};
    return out;
}

// Greedy closest matching of the requested poles against `ev` (consumed).
double matched_error(std::vector<std::complex<double>> ev,
                     const std::vector<std::complex<double>>& want) {
    double err = 0.0;
    for (const auto& p : want) {
        size_t best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < ev.size(); ++i) {
            const double d = std::abs(ev[i] - p);
            if (d < best_d) { best_d = d; best = i; }
        }
        err = std::max(err, best_d);
        ev.erase(ev.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return err;
}

struct Placement {
    Eigen::VectorXd K;
    double err = 0.0;
};

// Shared SISO placement core for an observable pair (A, C). The whole
// computation runs in extended precision: a double eigensolver's own error on
// the resulting (badly scaled, non-normal) closed-loop matrices is near the
// 1e-8 certification bar, so it can neither steer the refinement nor certify.
Placement place_pair(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C, const PoleSet& poles,
                     const char* who, const char* unobs_hint) {
    const Eigen::Index n = A.rows();
    {
        const Eigen::JacobiSVD<Eigen::MatrixXd> svd(observability_matrix(A, C));
        const double smax = svd.singularValues()[0];
        if (smax == 0.0 || svd.singularValues()[n - 1] < kObsTol * smax)
            throw std::runtime_error(std::string(who) + ": pair unobservable" + unobs_hint);
    }

    const MatL Al = A.cast<long double>();
    const Eigen::Matrix<long double, 1, Eigen::Dynamic> Cl = C.cast<long double>();
    MatL Obs(n, n);
    Eigen::Matrix<long double, 1, Eigen::Dynamic> row = Cl;
    for (Eigen::Index i = 0; i < n; ++i) {
        Obs.row(i) = row;
        row = row * Al;
    }
    const Eigen::PartialPivLU<MatL> lu(Obs);
    VecL en = VecL::Zero(n);
    en[n - 1] = 1.0L;
    const VecL q = lu.solve(en);

    const Polynomial want = poly_from_roots(poles);
    double pole_scale = 1.0;
    for (const auto& z : poles.poles) pole_scale = std::max(pole_scale, std::abs(z));

    // Ackermann on the dual pair: K = phi(A) Obs^{-1} e_n. The characteristic
    // polynomial of A - K C is affine in K for SISO, so the coefficient defect
    // measured by the eigensolver can be corrected by reapplying the formula.
    VecL K = horner_apply(want, Al, q);
    Placement best;
    best.err = std::numeric_limits<double>::infinity();
    for (int it = 0; it <= kRefineIters; ++it) {
        // Certify the double-rounded gain actually returned, not the extended
        // working value; rounding K already moves the placed eigenvalues.
        const Eigen::VectorXd Kd = K.cast<double>();
        const VecL Kl = Kd.cast<long double>();
        const std::vector<std::complex<double>> ev = eigenvalues_ld(Al - Kl * Cl);
        const double err = matched_error(ev, poles.poles);
        if (err < best.err) {
            best.err = err;
            best.K = Kd;
        }
        if (best.err < kRefineStop * pole_scale || it == kRefineIters) break;
        const Polynomial achieved = poly_from_complex_roots(ev, 1e-9);
        K = Kl + horner_apply(want - achieved, Al, q);
    }
    if (best.err > kPlaceTol * pole_scale)
        throw std::runtime_error(std::string(who) + ": placement residual " +
                                 std::to_string(best.err) + " exceeds 1e-8 * max|pole|");
    return best;
}

}  // namespace

PoleSet::PoleSet(std::vector<std::complex<double>> p) : poles(std::move(p)) {
    validate();
}

void PoleSet::validate() const {
    if (poles.empty()) throw std::runtime_error("pole set: empty");
    std::vector<std::complex<double>> pending;
    for (const auto& z : poles) {
        if (!(z.real() < 0.0))
            throw std::runtime_error("pole set: poles must lie strictly in the left half-plane");
        if (std::abs(z.imag()) > kConjTol * (1.0 + std::abs(z))) pending.push_back(z);
    }
    while (!pending.empty()) {
        const std::complex<double> z = pending.back();
        pending.pop_back();
        size_t match = pending.size();
        for (size_t i = 0; i < pending.size(); ++i) {
            if (std::abs(pending[i] - std::conj(z)) <= kConjTol * (1.0 + std::abs(z))) {
                match = i;
                break;
            }
        }
        if (match == pending.size())
            throw std::runtime_error(
                "pole set: not closed under complex conjugation (missing conjugates are "
                "rejected, never auto-completed)");
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(match));
    }
}

PoleSet PoleSet::with_real_parts(double re) const {
    PoleSet out;
    out.poles = poles;
    for (auto& z : out.poles) z = {re, z.imag()};
    out.validate();
    return out;
}

Polynomial poly_from_roots(const PoleSet& poles) {
    poles.validate();
    return poly_from_complex_roots(poles.poles, kConjTol);
}

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C) {
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd Obs(n, n);
    Eigen::RowVectorXd row = C;
    for (Eigen::Index i = 0; i < n; ++i) {
        Obs.row(i) = row;
        row = row * A;
    }
    return Obs;
}

double observability_margin(const Eigen::MatrixXd& A, const Eigen::RowVectorXd& C) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(observability_matrix(A, C));
    const double smax = svd.singularValues()[0];
    if (smax == 0.0) return 0.0;
    return svd.singularValues()[A.rows() - 1] / smax;
}

double matched_pole_error(const Eigen::MatrixXd& A, const std::vector<std::complex<double>>& want) {
    return matched_error(to_vector(eigenvalues(A)), want);
}

ObserverGain observer_gain(const StateSpace& ss, const PoleSet& poles) {
    poles.validate();
    if (poles.size() != ss.order())
        throw std::runtime_error("observer_gain: pole count must equal the model order");
    const Placement pl = place_pair(ss.A, ss.C, poles, "observer_gain", "");
    ObserverGain g;
    g.K_x = pl.K;
    g.placed_error = pl.err;
    return g;
}

ObserverGain extended_observer_gain(const StateSpace& ss, const PoleSet& poles) {
    poles.validate();
    const Eigen::Index n = ss.order();
    if (poles.size() != n + 1)
        throw std::runtime_error("extended_observer_gain: pole count must equal model order + 1");
    Eigen::MatrixXd Aa = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Aa.topLeftCorner(n, n) = ss.A;
    Aa.topRightCorner(n, 1) = ss.B;
    Eigen::RowVectorXd Ca = Eigen::RowVectorXd::Zero(n + 1);
    Ca.head(n) = ss.C;
    const Placement pl =
        place_pair(Aa, Ca, poles, "extended_observer_gain",
                   " (augmented with the input-correction state; this happens when the plant "
                   "has a transmission zero at the origin)");
    ObserverGain g;
    g.K_x = pl.K.head(n);
    g.K_d = pl.K[n];
    g.placed_error = pl.err;
    return g;
}

}  // namespace ctsid
