#pragma once

#include <Eigen/Dense>

namespace sff::nmpc {

struct BoxQpResult {
  Eigen::VectorXd x;
  bool converged{false};
  int iterations{0};
  double regularization{0.0};
};

/// Minimizes 1/2 x'Hx + g'x subject to lo <= x <= hi with a primal
/// active-set method started at the origin (which must be feasible).
/// H must be symmetric positive semi-definite; Levenberg regularization
/// (1e-8 I, escalating) is applied when a free-set factorization fails.
BoxQpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         int max_iter = 0);

}  // namespace sff::nmpc
