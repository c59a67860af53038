#include "ctsid/discretize.hpp"

#include <stdexcept>

namespace ctsid {

std::pair<Eigen::MatrixXd, Eigen::VectorXd> zoh_discretize(const StateSpace& ss, double h) {
    auto [Ad, Bd] = zoh_discretize(ss.A, ss.B, h);
    return {std::move(Ad), Eigen::VectorXd(Bd.col(0))};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> zoh_discretize(const Eigen::MatrixXd& A,
                                                           const Eigen::MatrixXd& B, double h) {
    if (h <= 0.0) throw std::runtime_error("zoh_discretize: step must be positive");
    if (A.rows() != A.cols() || B.rows() != A.rows())
        throw std::runtime_error("zoh_discretize: dimension mismatch");
    const Eigen::Index n = A.rows(), m = B.cols();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, m) = B;
    const Eigen::MatrixXd E = expm(aug * h);
    return {E.topLeftCorner(n, n), E.topRightCorner(n, m)};
}

Eigen::MatrixXd zoh_input_integral(const Eigen::MatrixXd& A, double h) {
    if (h <= 0.0) throw std::runtime_error("zoh_input_integral: step must be positive");
    if (A.rows() != A.cols()) throw std::runtime_error("zoh_input_integral: matrix must be square");
    const Eigen::Index n = A.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = A;
    aug.topRightCorner(n, n).setIdentity();
    return expm(aug * h).topRightCorner(n, n);
}

}  // namespace ctsid
