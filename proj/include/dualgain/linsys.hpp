#pragma once

#include <Eigen/Dense>
#include <utility>

namespace dualgain {

// Dense LU with partial pivoting plus a reciprocal-condition report.
// Throws std::runtime_error naming the condition number when the factor
// is numerically singular.
std::pair<Eigen::VectorXd, double> solve_dense(const Eigen::MatrixXd& A,
                                               const Eigen::VectorXd& rhs,
                                               const char* what);

}  // namespace dualgain
