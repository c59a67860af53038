#pragma once

#include <Eigen/Dense>

namespace ctsid {

// Matrix exponential via scaling-and-squaring with diagonal Pade approximants
// (orders 3/5/7/9/13 selected by the 1-norm).
Eigen::MatrixXd expm(const Eigen::MatrixXd& M);

}  // namespace ctsid
