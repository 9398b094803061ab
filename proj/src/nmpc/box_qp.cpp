#include "sff/nmpc/box_qp.hpp"

#include <limits>
#include <vector>

namespace sff::nmpc {

namespace {

enum class Bound : signed char { Free = 0, Lower = -1, Upper = 1 };

}  // namespace

BoxQpResult solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& g,
                         const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         int max_iter) {
  const int n = static_cast<int>(g.size());
  if (max_iter <= 0) max_iter = 3 * n + 20;

  BoxQpResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<Bound> active(n, Bound::Free);
  for (int i = 0; i < n; ++i) {
    if (lo(i) >= hi(i)) {
      res.x(i) = lo(i);
      active[i] = Bound::Lower;
    }
  }

  const double gscale = 1.0 + g.cwiseAbs().maxCoeff();
  const double step_tol = 1e-13 * gscale;
  const double mult_tol = 1e-11 * gscale;

  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    std::vector<int> free;
    free.reserve(n);
    for (int i = 0; i < n; ++i) {
      if (active[i] == Bound::Free) free.push_back(i);
    }
    const int nf = static_cast<int>(free.size());

    Eigen::VectorXd p = Eigen::VectorXd::Zero(n);
    if (nf > 0) {
      Eigen::MatrixXd hff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (int a = 0; a < nf; ++a) {
        for (int b = 0; b < nf; ++b) hff(a, b) = h(free[a], free[b]);
        rhs(a) = -(g(free[a]) + h.row(free[a]).dot(res.x));
      }
      double reg = 0.0;
      Eigen::LLT<Eigen::MatrixXd> llt(hff);
      while (llt.info() != Eigen::Success) {
        reg = reg == 0.0 ? 1e-8 : reg * 10.0;
        if (reg > 1e2) break;
        llt.compute(hff + reg * Eigen::MatrixXd::Identity(nf, nf));
      }
      res.regularization = std::max(res.regularization, reg);
      if (llt.info() != Eigen::Success) break;
      const Eigen::VectorXd pf = llt.solve(rhs);
      for (int a = 0; a < nf; ++a) p(free[a]) = pf(a);
    }

    if (p.lpNorm<Eigen::Infinity>() < step_tol) {
      // Stationary for the working set; check multiplier signs.
      const Eigen::VectorXd grad = g + h * res.x;
      int worst = -1;
      double worst_mult = -mult_tol;
      for (int i = 0; i < n; ++i) {
        if (active[i] == Bound::Free || lo(i) >= hi(i)) continue;
        const double mult = active[i] == Bound::Lower ? grad(i) : -grad(i);
        if (mult < worst_mult) {
          worst_mult = mult;
          worst = i;
        }
      }
      if (worst < 0) {
        res.converged = true;
        return res;
      }
      active[worst] = Bound::Free;
      continue;
    }

    // Step to the nearest blocking bound.
    double alpha = 1.0;
    int blocking = -1;
    Bound side = Bound::Free;
    for (int i : free) {
      if (p(i) > step_tol) {
        const double a = (hi(i) - res.x(i)) / p(i);
        if (a < alpha) {
          alpha = a;
          blocking = i;
          side = Bound::Upper;
        }
      } else if (p(i) < -step_tol) {
        const double a = (lo(i) - res.x(i)) / p(i);
        if (a < alpha) {
          alpha = a;
          blocking = i;
          side = Bound::Lower;
        }
      }
    }
    res.x += alpha * p;
    if (blocking >= 0) {
      res.x(blocking) = side == Bound::Upper ? hi(blocking) : lo(blocking);
      active[blocking] = side;
    }
  }
  // Iteration cap hit: return the current (feasible) iterate.
  for (int i = 0; i < n; ++i) res.x(i) = std::clamp(res.x(i), lo(i), hi(i));
  return res;
}

}  // namespace sff::nmpc
