#pragma once

// Independent reference implementations used only by tests. Everything here is
// written from first principles (simultaneous root iteration, long-double
// Taylor series, RK4, central differences, normal equations) so the library
// can be checked against code that shares none of its algorithms.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// Roots of a monic polynomial c[0] + c[1] x + ... + c[n-1] x^(n-1) + x^n by
// Durand-Kerner simultaneous iteration.
inline std::vector<std::complex<double>> roots_durand_kerner(const Eigen::VectorXd& ascending) {
    const Eigen::Index n = ascending.size();
    if (n < 1) throw std::runtime_error("oracle: need at least one coefficient");
    std::vector<std::complex<double>> c(static_cast<std::size_t>(n) + 1);
    for (Eigen::Index i = 0; i < n; ++i) c[static_cast<std::size_t>(i)] = ascending[i];
    c.back() = 1.0;
    const auto eval = [&](std::complex<double> x) {
        std::complex<double> acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
        return acc;
    };
    std::vector<std::complex<double>> r(static_cast<std::size_t>(n));
    const std::complex<double> seed(0.4, 0.9);
    std::complex<double> p = 1.0;
    for (auto& ri : r) {
        p *= seed;
        ri = p;
    }
    for (int iter = 0; iter < 1000; ++iter) {
        double moved = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            std::complex<double> denom = 1.0;
            for (std::size_t j = 0; j < r.size(); ++j)
                if (j != i) denom *= r[i] - r[j];
            const std::complex<double> delta = eval(r[i]) / denom;
            r[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-14) break;
    }
    return r;
}

// exp(A) by long-double Taylor series: scale until the max-abs entry is below
// 1/4, sum 60 terms, square back.
inline Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& A) {
    const Eigen::Index n = A.rows();
    LongMatrix As = A.cast<long double>();
    int squarings = 0;
    while (As.cwiseAbs().maxCoeff() > 0.25L) {
        As /= 2.0L;
        ++squarings;
    }
    LongMatrix result = LongMatrix::Identity(n, n);
    LongMatrix term = LongMatrix::Identity(n, n);
    for (int k = 1; k <= 60; ++k) {
        term = (term * As / static_cast<long double>(k)).eval();
        result += term;
    }
    for (int s = 0; s < squarings; ++s) result = (result * result).eval();
    return result.cast<double>();
}

// One RK4 step of xdot = A x + b with b held constant across the step.
inline Eigen::VectorXd rk4_lti_step(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                    const Eigen::VectorXd& x, double dt) {
    const Eigen::VectorXd k1 = A * x + b;
    const Eigen::VectorXd k2 = A * (x + 0.5 * dt * k1) + b;
    const Eigen::VectorXd k3 = A * (x + 0.5 * dt * k2) + b;
    const Eigen::VectorXd k4 = A * (x + dt * k3) + b;
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Central-difference Jacobian of a vector-valued map.
template <typename Fn>
inline Eigen::MatrixXd central_jacobian(Fn f, const Eigen::VectorXd& v, double step) {
    const Eigen::VectorXd f0 = f(v);
    Eigen::MatrixXd J(f0.size(), v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        Eigen::VectorXd hi = v, lo = v;
        const double d = step * (1.0 + std::abs(v[i]));
        hi[i] += d;
        lo[i] -= d;
        J.col(i) = (f(hi) - f(lo)) / (2.0 * d);
    }
    return J;
}

// min ||A x - b||^2 via long-double normal equations.
inline Eigen::VectorXd lstsq_normal(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    const LongMatrix Al = A.cast<long double>();
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> bl = b.cast<long double>();
    const LongMatrix AtA = Al.transpose() * Al;
    const Eigen::Matrix<long double, Eigen::Dynamic, 1> Atb = Al.transpose() * bl;
    return AtA.fullPivLu().solve(Atb).cast<double>();
}

// Largest |match| gap between two unordered complex multisets (greedy pairing).
inline double set_distance(std::vector<std::complex<double>> a,
                           std::vector<std::complex<double>> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (const auto& x : a) {
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = std::abs(x - b[j]);
            if (d < bd) {
                bd = d;
                best = j;
            }
        }
        worst = std::max(worst, bd);
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(best));
    }
    return worst;
}

}  // namespace oracle
