#include "ctsid/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ctsid {

TransferFunction TransferFunction::from_descending(const Eigen::VectorXd& num_desc,
                                                   const Eigen::VectorXd& den_desc) {
    return {Polynomial::from_descending(num_desc), Polynomial::from_descending(den_desc)};
}

TransferFunction TransferFunction::zero() {
    return {Polynomial(Eigen::VectorXd::Zero(1)), Polynomial(Eigen::VectorXd::Ones(1))};
}

TransferFunction TransferFunction::normalized() const {
    if (den.is_zero()) throw std::runtime_error("transfer function: zero denominator");
    if (num.degree() > den.degree())
        throw std::runtime_error("transfer function: improper (deg num > deg den)");
    const double lead = den.leading();
    return {(1.0 / lead) * num.trimmed(), den.monic()};
}

double TransferFunction::direct_term() const {
    const TransferFunction g = normalized();
    if (g.num.degree() == g.den.degree()) return g.num.leading();
    return 0.0;
}

ModelStructure::ModelStructure(int den_degree, int num_degree) : n(den_degree), m(num_degree) {
    if (n < 1) throw std::runtime_error("model structure: denominator degree must be >= 1");
    if (m < 0 || m >= n)
        throw std::runtime_error("model structure: numerator degree must satisfy 0 <= m < n");
}

TransferFunction theta_to_tf(const ModelStructure& ms, const Eigen::VectorXd& theta) {
    if (theta.size() != ms.n_theta())
        throw std::runtime_error("theta_to_tf: parameter vector length mismatch");
    Eigen::VectorXd den_desc(ms.n + 1);
    den_desc[0] = 1.0;
    den_desc.tail(ms.n) = theta.head(ms.n);
    const Eigen::VectorXd num_desc = theta.tail(ms.m + 1);
    return TransferFunction::from_descending(num_desc, den_desc);
}

Eigen::VectorXd tf_to_theta(const ModelStructure& ms, const TransferFunction& tf) {
    const TransferFunction g = tf.normalized();
    if (g.den.degree() != ms.n || g.num.degree() > ms.m)
        throw std::runtime_error("tf_to_theta: degrees do not fit the model structure");
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(ms.n_theta());
    theta.head(ms.n) = g.den.descending().tail(ms.n);
    Eigen::VectorXd num_asc = Eigen::VectorXd::Zero(ms.m + 1);
    num_asc.head(g.num.c.size()) = g.num.c;
    theta.tail(ms.m + 1) = num_asc.reverse();
    return theta;
}

StateSpace realize_ccf(const ModelStructure& ms, const Eigen::VectorXd& theta) {
    if (theta.size() != ms.n_theta())
        throw std::runtime_error("realize_ccf: parameter vector length mismatch");
    const int n = ms.n;
    StateSpace ss;
    ss.A = Eigen::MatrixXd::Zero(n, n);
    ss.A.topRightCorner(n - 1, n - 1).setIdentity();
    // theta denominator part is descending below the monic term; the companion
    // bottom row holds negated ascending coefficients.
    ss.A.row(n - 1) = -theta.head(n).reverse().transpose();
    ss.B = Eigen::VectorXd::Zero(n);
    ss.B[n - 1] = 1.0;
    ss.C = Eigen::RowVectorXd::Zero(n);
    ss.C.head(ms.m + 1) = theta.tail(ms.m + 1).reverse().transpose();
    return ss;
}

StateSpace realize_ccf(const TransferFunction& tf) {
    const TransferFunction g = tf.normalized();
    if (g.num.degree() >= g.den.degree())
        throw std::runtime_error("realize_ccf: transfer function must be strictly proper");
    const ModelStructure ms(g.den.degree(), g.den.degree() - 1);
    return realize_ccf(ms, tf_to_theta(ms, g));
}

ProperRealization realize_proper(const TransferFunction& tf) {
    ProperRealization out;
    if (tf.is_zero()) return out;
    const TransferFunction g = tf.normalized();
    out.D = g.direct_term();
    const Polynomial strict_num = g.num - out.D * g.den;
    if (strict_num.degree() < 0) return out;  // pure gain
    out.ss = realize_ccf(TransferFunction(strict_num, g.den));
    out.order = out.ss.order();
    return out;
}

namespace {

// Parlett-Reinsch balancing: diagonal similarity with powers of two (exact in
// floating point), equalizing row/column norms. Eigen's EigenSolver does not
// balance, which costs several digits on badly scaled companion-type matrices.
Eigen::MatrixXd balance(Eigen::MatrixXd A) {
    const Eigen::Index n = A.rows();
    const double radix = 2.0, sq = radix * radix;
    bool again = true;
    while (again) {
        again = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            double r = 0.0, c = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(A(j, i));
                r += std::abs(A(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            while (c < r / radix) { f *= radix; c *= sq; }
            while (c > r * radix) { f /= radix; c /= sq; }
            if ((c + r) / f < 0.95 * s) {
                again = true;
                A.row(i) *= 1.0 / f;
                A.col(i) *= f;
            }
        }
    }
    return A;
}

}  // namespace

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::runtime_error("eigenvalues: matrix must be square");
    Eigen::EigenSolver<Eigen::MatrixXd> es(balance(A), false);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("eigenvalues: eigensolver failed to converge");
    return es.eigenvalues();
}

bool is_hurwitz(const Eigen::MatrixXd& A, double margin) {
    const Eigen::VectorXcd ev = eigenvalues(A);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        if (ev[i].real() >= -margin) return false;
    return true;
}

Polynomial charpoly(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) throw std::runtime_error("charpoly: matrix must be square");
    const Eigen::Index n = A.rows();
    // Faddeev-LeVerrier: M_0 = I, c_n = 1; c_{n-k} = -tr(A*M_{k-1})/k.
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n + 1);
    coeffs[n] = 1.0;
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index k = 1; k <= n; ++k) {
        const Eigen::MatrixXd AM = A * M;
        const double ck = -AM.trace() / static_cast<double>(k);
        coeffs[n - k] = ck;
        M = AM;
        M.diagonal().array() += ck;
    }
    return Polynomial(coeffs);
}

TransferFunction tf_from_ss(const StateSpace& ss) {
    const Polynomial den = charpoly(ss.A);
    const Polynomial shifted = charpoly(ss.A - ss.B * ss.C);
    return TransferFunction(shifted - den, den);
}

Eigen::VectorXcd freq_response(const TransferFunction& tf, const Eigen::VectorXd& omega) {
    const TransferFunction g = tf.normalized();
    Eigen::VectorXcd out(omega.size());
    for (Eigen::Index i = 0; i < omega.size(); ++i) {
        const std::complex<double> p(0.0, omega[i]);
        out[i] = g.num(p) / g.den(p);
    }
    return out;
}

}  // namespace ctsid
