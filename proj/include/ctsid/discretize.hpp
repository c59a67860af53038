#pragma once

#include "ctsid/expm.hpp"
#include "ctsid/model.hpp"

#include <Eigen/Dense>

#include <utility>

namespace ctsid {

// Exact zero-order-hold discretization at step h:
// Ad = e^{Ah}, Bd = (integral_0^h e^{A tau} dtau) B,
// computed jointly via expm of the augmented block matrix [[A, B], [0, 0]]*h.
std::pair<Eigen::MatrixXd, Eigen::VectorXd> zoh_discretize(const StateSpace& ss, double h);

// Same, for a general input matrix (any number of held input channels).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> zoh_discretize(const Eigen::MatrixXd& A,
                                                           const Eigen::MatrixXd& B, double h);

// integral_0^h e^{A tau} dtau (the input map of a held full-state injection).
Eigen::MatrixXd zoh_input_integral(const Eigen::MatrixXd& A, double h);

}  // namespace ctsid
