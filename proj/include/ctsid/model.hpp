#pragma once

#include "ctsid/polynomial.hpp"

#include <Eigen/Dense>

#include <complex>

namespace ctsid {

// Rational SISO model num(p)/den(p); den is kept monic after normalize().
struct TransferFunction {
    Polynomial num;
    Polynomial den;

    TransferFunction() = default;
    TransferFunction(Polynomial n, Polynomial d) : num(std::move(n)), den(std::move(d)) {}
    static TransferFunction from_descending(const Eigen::VectorXd& num_desc,
                                            const Eigen::VectorXd& den_desc);
    static TransferFunction zero();

    bool is_zero() const { return num.is_zero(); }
    // Scale so den is monic; rejects improper (deg num > deg den) models.
    TransferFunction normalized() const;
    // Direct feedthrough: nonzero only when deg num == deg den.
    double direct_term() const;
};

// Parametrized model set: denominator degree n (monic), numerator degree m < n.
// theta = [n denominator coefficients below the monic leading term, descending]
//      ++ [m+1 numerator coefficients, descending].
struct ModelStructure {
    int n = 0;
    int m = 0;

    ModelStructure() = default;
    ModelStructure(int den_degree, int num_degree);
    int n_theta() const { return n + m + 1; }
};

// Strictly proper state-space realization (direct term fixed at zero).
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;

    Eigen::Index order() const { return A.rows(); }
};

TransferFunction theta_to_tf(const ModelStructure& ms, const Eigen::VectorXd& theta);
Eigen::VectorXd tf_to_theta(const ModelStructure& ms, const TransferFunction& tf);

// Controllable canonical form: A companion of the monic denominator, B the last
// unit vector, C the numerator coefficients.
StateSpace realize_ccf(const ModelStructure& ms, const Eigen::VectorXd& theta);
StateSpace realize_ccf(const TransferFunction& tf);

// Proper (not necessarily strictly proper) model split into direct term plus a
// strictly proper state-space part; a zero transfer function yields order 0.
struct ProperRealization {
    StateSpace ss;
    double D = 0.0;
    Eigen::Index order = 0;
};
ProperRealization realize_proper(const TransferFunction& tf);

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A);
bool is_hurwitz(const Eigen::MatrixXd& A, double margin = 0.0);

// Monic characteristic polynomial det(pI - A) via the Faddeev-LeVerrier recursion.
Polynomial charpoly(const Eigen::MatrixXd& A);

// Recover num/den from a strictly proper realization:
// den = charpoly(A), num = charpoly(A - B*C) - charpoly(A).
TransferFunction tf_from_ss(const StateSpace& ss);

// Evaluate tf at p = i*omega per grid point. Evaluation at a pole yields a
// non-finite entry (flagged point), never a throw.
Eigen::VectorXcd freq_response(const TransferFunction& tf, const Eigen::VectorXd& omega);

}  // namespace ctsid
