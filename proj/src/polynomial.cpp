#include "ctsid/polynomial.hpp"

#include <cmath>
#include <stdexcept>

namespace ctsid {

Polynomial Polynomial::from_descending(const Eigen::VectorXd& d) {
    return Polynomial(d.reverse());
}

Eigen::VectorXd Polynomial::descending() const {
    return c.reverse();
}

int Polynomial::degree() const {
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i)
        if (c[i] != 0.0) return i;
    return -1;
}

bool Polynomial::is_zero() const {
    return degree() < 0;
}

double Polynomial::leading() const {
    const int d = degree();
    if (d < 0) throw std::runtime_error("polynomial: leading coefficient of zero polynomial");
    return c[d];
}

Polynomial Polynomial::trimmed() const {
    const int d = degree();
    if (d < 0) return Polynomial(Eigen::VectorXd::Zero(1));
    return Polynomial(c.head(d + 1));
}

Polynomial Polynomial::monic() const {
    return (1.0 / leading()) * trimmed();
}

double Polynomial::operator()(double x) const {
    double acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * x + c[i];
    return acc;
}

std::complex<double> Polynomial::operator()(const std::complex<double>& x) const {
    std::complex<double> acc = 0.0;
    for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) acc = acc * x + c[i];
    return acc;
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    const auto na = a.c.size(), nb = b.c.size();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(std::max(na, nb));
    out.head(na) += a.c;
    out.head(nb) += b.c;
    return Polynomial(out);
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    return a + (-1.0 * b);
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c.size() == 0 || b.c.size() == 0) return Polynomial(Eigen::VectorXd::Zero(1));
    Eigen::VectorXd out = Eigen::VectorXd::Zero(a.c.size() + b.c.size() - 1);
    for (Eigen::Index i = 0; i < a.c.size(); ++i)
        for (Eigen::Index j = 0; j < b.c.size(); ++j) out[i + j] += a.c[i] * b.c[j];
    return Polynomial(out);
}

Polynomial operator*(double s, const Polynomial& a) {
    return Polynomial(s * a.c);
}

Polynomial poly_from_complex_roots(const std::vector<std::complex<double>>& r, double imag_tol) {
    // Pair conjugates into real quadratic factors so the expansion is exactly real.
    std::vector<std::complex<double>> pending(r);
    Polynomial out(Eigen::VectorXd::Ones(1));
    while (!pending.empty()) {
        const std::complex<double> z = pending.back();
        pending.pop_back();
        if (std::abs(z.imag()) <= imag_tol * (1.0 + std::abs(z))) {
            Eigen::VectorXd lin(2);
            lin << -z.real(), 1.0;
            out = out * Polynomial(lin);
            continue;
        }
        // Find the closest match to conj(z) among the remaining roots.
        size_t best = pending.size();
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < pending.size(); ++i) {
            const double d = std::abs(pending[i] - std::conj(z));
            if (d < best_d) { best_d = d; best = i; }
        }
        if (best == pending.size() || best_d > imag_tol * (1.0 + std::abs(z)))
            throw std::runtime_error("poly_from_complex_roots: roots are not closed under conjugation");
        const std::complex<double> w = pending[best];
        pending.erase(pending.begin() + static_cast<std::ptrdiff_t>(best));
        Eigen::VectorXd quad(3);
        quad << (z * w).real(), -(z + w).real(), 1.0;
        out = out * Polynomial(quad);
    }
    return out;
}

Eigen::MatrixXd companion(const Polynomial& monic_poly) {
    const Polynomial q = monic_poly.trimmed();
    const int n = q.degree();
    if (n < 1) throw std::runtime_error("companion: polynomial degree must be >= 1");
    if (std::abs(q.leading() - 1.0) > 1e-12)
        throw std::runtime_error("companion: polynomial must be monic");
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    A.topRightCorner(n - 1, n - 1).setIdentity();
    A.row(n - 1) = -q.c.head(n).transpose();
    return A;
}

std::vector<std::complex<double>> roots(const Polynomial& poly) {
    const Polynomial q = poly.trimmed();
    const int n = q.degree();
    if (n < 1) return {};
    Eigen::EigenSolver<Eigen::MatrixXd> es(companion(q.monic()), false);
    if (es.info() != Eigen::Success) throw std::runtime_error("roots: eigensolver failed to converge");
    std::vector<std::complex<double>> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = es.eigenvalues()[i];
    return out;
}

Eigen::MatrixXd polyval(const Polynomial& poly, const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::runtime_error("polyval: matrix argument must be square");
    const Eigen::Index n = M.rows();
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    for (int i = static_cast<int>(poly.c.size()) - 1; i >= 0; --i) {
        acc = acc * M;
        acc.diagonal().array() += poly.c[i];
    }
    return acc;
}

}  // namespace ctsid
