#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

namespace ctsid {

// Real polynomial in p. Coefficients are stored ascending: c[i] multiplies p^i.
// Every external representation (configs, printed transfer functions, theta
// vectors) is descending-power; convert at the boundary.
struct Polynomial {
    Eigen::VectorXd c;

    Polynomial() = default;
    explicit Polynomial(Eigen::VectorXd ascending) : c(std::move(ascending)) {}

    static Polynomial from_descending(const Eigen::VectorXd& d);
    Eigen::VectorXd descending() const;

    // Degree of the stored representation; -1 for an empty/zero polynomial.
    int degree() const;
    bool is_zero() const;
    double leading() const;

    // Drop zero leading coefficients so the invariant "leading nonzero" holds.
    Polynomial trimmed() const;
    Polynomial monic() const;

    double operator()(double x) const;
    std::complex<double> operator()(const std::complex<double>& x) const;
};

Polynomial operator+(const Polynomial& a, const Polynomial& b);
Polynomial operator-(const Polynomial& a, const Polynomial& b);
Polynomial operator*(const Polynomial& a, const Polynomial& b);
Polynomial operator*(double s, const Polynomial& a);

// Monic real polynomial with the given roots; imaginary parts must cancel in
// conjugate pairs (checked against imag_tol relative to coefficient scale).
Polynomial poly_from_complex_roots(const std::vector<std::complex<double>>& r,
                                   double imag_tol = 1e-12);

// Companion matrix of a monic polynomial, bottom-row convention:
// last row holds the negated ascending coefficients below the leading term.
Eigen::MatrixXd companion(const Polynomial& monic_poly);

// All roots, via eigenvalues of the companion matrix.
std::vector<std::complex<double>> roots(const Polynomial& poly);

// Evaluate a polynomial at a square matrix argument (Horner).
Eigen::MatrixXd polyval(const Polynomial& poly, const Eigen::MatrixXd& M);

}  // namespace ctsid
