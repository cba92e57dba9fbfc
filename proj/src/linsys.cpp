#include "dualgain/linsys.hpp"

#include <stdexcept>
#include <string>

namespace dualgain {

std::pair<Eigen::VectorXd, double> solve_dense(const Eigen::MatrixXd& A,
                                               const Eigen::VectorXd& rhs,
                                               const char* what) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  const double rcond = lu.rcond();
  const double cond = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!(rcond > 1e-14))
    throw std::runtime_error(std::string(what) +
                             ": singular linear system, condition number " +
                             std::to_string(cond));
  return {lu.solve(rhs), cond};
}

}  // namespace dualgain
