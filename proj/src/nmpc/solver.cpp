#include "sff/nmpc/solver.hpp"

#include "sff/dynamics/ode.hpp"
#include "sff/nmpc/box_qp.hpp"

#include <cmath>
#include <complex>

namespace sff::nmpc {

using dynamics::RigidBodyStateT;
using dynamics::WrenchT;

RigidBodyState discrete_step(const RigidBodyState& x, const Wrench& u,
                             const OcpProblem& p) {
  return dynamics::step_rk4_t<double>(x, u, p.orbit, p.body, p.dt);
}

std::vector<RigidBodyState> rollout(const OcpProblem& p,
                                    const std::vector<Wrench>& u_seq) {
  std::vector<RigidBodyState> x(u_seq.size() + 1);
  x[0] = p.x0;
  for (std::size_t k = 0; k < u_seq.size(); ++k) {
    x[k + 1] = discrete_step(x[k], u_seq[k], p);
  }
  return x;
}

namespace {

using Cplx = std::complex<double>;
constexpr double kCsStep = 1e-20;

RigidBodyStateT<Cplx> to_complex(const RigidBodyState& x) {
  RigidBodyStateT<Cplx> c;
  c.p_h = x.p_h.cast<Cplx>();
  c.v_h = x.v_h.cast<Cplx>();
  c.q_hb = dynamics::QuatT<Cplx>{Cplx(x.q_hb.w), Cplx(x.q_hb.x),
                                 Cplx(x.q_hb.y), Cplx(x.q_hb.z)};
  c.omega_b = x.omega_b.cast<Cplx>();
  return c;
}

Eigen::Matrix<double, 13, 1> imag_over(const RigidBodyStateT<Cplx>& x,
                                       double h) {
  Eigen::Matrix<Cplx, 13, 1> v = x.to_vector();
  Eigen::Matrix<double, 13, 1> out;
  for (int i = 0; i < 13; ++i) out(i) = v(i).imag() / h;
  return out;
}

}  // namespace

void linearize_step(const RigidBodyState& x, const Wrench& u,
                    const OcpProblem& p, Eigen::Matrix<double, 13, 13>* a,
                    Eigen::Matrix<double, 13, 6>* b) {
  const RigidBodyStateT<Cplx> xc = to_complex(x);
  WrenchT<Cplx> uc;
  uc.force_b = u.force_b.cast<Cplx>();
  uc.torque_b = u.torque_b.cast<Cplx>();

  for (int j = 0; j < 13; ++j) {
    Eigen::Matrix<Cplx, 13, 1> v = xc.to_vector();
    v(j) += Cplx(0.0, kCsStep);
    const auto pert = RigidBodyStateT<Cplx>::from_vector(v);
    const auto next = dynamics::step_rk4_t<Cplx>(pert, uc, p.orbit, p.body, p.dt);
    a->col(j) = imag_over(next, kCsStep);
  }
  for (int j = 0; j < 6; ++j) {
    WrenchT<Cplx> up = uc;
    Eigen::Matrix<Cplx, 6, 1> uv = up.to_vector();
    uv(j) += Cplx(0.0, kCsStep);
    up = WrenchT<Cplx>::from_vector(uv);
    const auto next = dynamics::step_rk4_t<Cplx>(xc, up, p.orbit, p.body, p.dt);
    b->col(j) = imag_over(next, kCsStep);
  }
}

namespace {

double cost_of_trajectory(const OcpProblem& p,
                          const std::vector<RigidBodyState>& x,
                          const std::vector<Wrench>& u) {
  double c = 0.0;
  for (int k = 0; k < p.horizon; ++k) c += stage_cost(x[k], u[k], p.refs[k], p.weights);
  c += terminal_cost(x[p.horizon], p.refs[p.horizon], p.weights);
  return c;
}

double penalty_of_trajectory(const OcpProblem& p,
                             const std::vector<RigidBodyState>& x, double rho) {
  if (rho <= 0.0) return 0.0;
  double v = 0.0;
  for (const auto& o : p.obstacles) {
    for (int k = 1; k <= p.horizon; ++k) {
      const double d = (x[k].p_h - o.positions[k]).norm();
      const double gap = o.d_min - d;
      if (gap > 0.0) v += rho * gap * gap;
    }
  }
  if (p.v_max > 0.0) {
    for (int k = 1; k <= p.horizon; ++k) {
      for (int i = 0; i < 3; ++i) {
        const double e = std::abs(x[k].v_h(i)) - p.v_max;
        if (e > 0.0) v += rho * e * e;
      }
    }
  }
  return v;
}

/// Worst constraint violation of a trajectory, meters (collision) or m/s.
double max_violation(const OcpProblem& p, const std::vector<RigidBodyState>& x) {
  double v = 0.0;
  for (const auto& o : p.obstacles) {
    for (int k = 1; k <= p.horizon; ++k) {
      v = std::max(v, o.d_min - (x[k].p_h - o.positions[k]).norm());
    }
  }
  if (p.v_max > 0.0) {
    for (int k = 1; k <= p.horizon; ++k) {
      v = std::max(v, x[k].v_h.cwiseAbs().maxCoeff() - p.v_max);
    }
  }
  return v;
}

/// Gauss-Newton gradient and Hessian of cost + penalty with respect to the
/// stacked input vector, through the shooting sensitivities.
void assemble(const OcpProblem& p, const std::vector<RigidBodyState>& x,
              const std::vector<Wrench>& u, double rho, Eigen::VectorXd* g,
              Eigen::MatrixXd* h) {
  const int n_nodes = p.horizon;
  const int n = 6 * n_nodes;
  g->setZero(n);
  if (h) h->setZero(n, n);

  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(13, n);
  Eigen::Matrix<double, 13, 13> a;
  Eigen::Matrix<double, 13, 6> b;

  for (int k = 0; k <= n_nodes; ++k) {
    if (k >= 1) {
      const bool terminal = k == n_nodes;
      const double scale = terminal ? p.weights.terminal_scale : 1.0;
      const auto& ref = p.refs[k];

      Eigen::Matrix<double, 13, 13> m = Eigen::Matrix<double, 13, 13>::Zero();
      Eigen::Matrix<double, 13, 1> y = Eigen::Matrix<double, 13, 1>::Zero();

      m.block<3, 3>(0, 0) = scale * p.weights.q_p;
      m.block<3, 3>(3, 3) = scale * p.weights.q_v;
      m.block<3, 3>(10, 10) = scale * p.weights.q_omega;
      y.segment<3>(0) = scale * p.weights.q_p * (x[k].p_h - ref.p_h);
      y.segment<3>(3) = scale * p.weights.q_v * (x[k].v_h - ref.v_h);
      y.segment<3>(10) = scale * p.weights.q_omega * (x[k].omega_b - ref.omega_b);

      const Eigen::Vector4d q(x[k].q_hb.w, x[k].q_hb.x, x[k].q_hb.y, x[k].q_hb.z);
      const Eigen::Vector4d qr(ref.q_hb.w, ref.q_hb.x, ref.q_hb.y, ref.q_hb.z);
      const double d = q.dot(qr);
      // residual sqrt(q_q) (1 - d^2); Jacobian -2 sqrt(q_q) d qr^T
      m.block<4, 4>(6, 6) = scale * p.weights.q_q * 4.0 * d * d * qr * qr.transpose();
      y.segment<4>(6) = scale * p.weights.q_q * (-2.0 * d * (1.0 - d * d)) * qr;

      if (rho > 0.0) {
        for (const auto& o : p.obstacles) {
          const Vec3 delta = x[k].p_h - o.positions[k];
          const double dist = delta.norm();
          if (dist < o.d_min) {
            const Vec3 dir = dist > 1e-9 ? Vec3(delta / dist) : Vec3(1, 0, 0);
            y.segment<3>(0) += -rho * (o.d_min - dist) * dir;
            m.block<3, 3>(0, 0) += rho * dir * dir.transpose();
          }
        }
        if (p.v_max > 0.0) {
          for (int i = 0; i < 3; ++i) {
            const double vi = x[k].v_h(i);
            if (std::abs(vi) > p.v_max) {
              y(3 + i) += rho * (std::abs(vi) - p.v_max) * (vi > 0 ? 1.0 : -1.0);
              m(3 + i, 3 + i) += rho;
            }
          }
        }
      }

      const int w = 6 * k;
      g->head(w).noalias() += 2.0 * s.leftCols(w).transpose() * y;
      if (h) {
        const Eigen::MatrixXd t = m.selfadjointView<Eigen::Lower>() * s.leftCols(w);
        h->topLeftCorner(w, w).noalias() += 2.0 * s.leftCols(w).transpose() * t;
      }
    }
    if (k < n_nodes) {
      const auto uv = u[k].to_vector();
      g->segment<6>(6 * k) += 2.0 * p.weights.r * uv;
      if (h) h->block<6, 6>(6 * k, 6 * k) += 2.0 * p.weights.r;

      linearize_step(x[k], u[k], p, &a, &b);
      if (k > 0) {
        s.leftCols(6 * k) = (a * s.leftCols(6 * k)).eval();
      }
      s.middleCols<6>(6 * k) = b;
    }
  }
  if (h) *h = 0.5 * (*h + h->transpose());
}

Eigen::VectorXd stack_inputs(const std::vector<Wrench>& u) {
  Eigen::VectorXd v(6 * u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    v.segment<6>(6 * k) = u[k].to_vector();
  }
  return v;
}

std::vector<Wrench> unstack_inputs(const Eigen::VectorXd& v) {
  std::vector<Wrench> u(v.size() / 6);
  for (std::size_t k = 0; k < u.size(); ++k) {
    u[k] = Wrench::from_vector(v.segment<6>(6 * k));
  }
  return u;
}

double projected_gradient_norm(const Eigen::VectorXd& u, const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lb,
                               const Eigen::VectorXd& ub) {
  double m = 0.0;
  for (int i = 0; i < u.size(); ++i) {
    const double stepped = std::clamp(u(i) - g(i), lb(i), ub(i));
    m = std::max(m, std::abs(u(i) - stepped));
  }
  return m;
}

}  // namespace

double total_cost(const OcpProblem& p, const std::vector<Wrench>& u_seq) {
  return cost_of_trajectory(p, rollout(p, u_seq), u_seq);
}

Eigen::VectorXd cost_gradient(const OcpProblem& p,
                              const std::vector<Wrench>& u_seq) {
  const auto x = rollout(p, u_seq);
  Eigen::VectorXd g;
  assemble(p, x, u_seq, 0.0, &g, nullptr);
  return g;
}

OcpSolution solve_ocp(const OcpProblem& problem, const OcpSolution* warm_start,
                      const SolverConfig& cfg) {
  problem.validate();
  const int n_steps = problem.horizon;
  const int n = 6 * n_steps;

  Eigen::VectorXd ub(n), lb(n);
  for (int k = 0; k < n_steps; ++k) {
    ub.segment<6>(6 * k) = problem.bounds.upper();
  }
  lb = -ub;

  Eigen::VectorXd u_vec = Eigen::VectorXd::Zero(n);
  if (warm_start &&
      warm_start->u_seq.size() == static_cast<std::size_t>(n_steps)) {
    u_vec = stack_inputs(warm_start->u_seq).cwiseMax(lb).cwiseMin(ub);
  }
  std::vector<Wrench> u = unstack_inputs(u_vec);
  std::vector<RigidBodyState> x = rollout(problem, u);

  const bool constrained = !problem.obstacles.empty() || problem.v_max > 0.0;
  double rho = constrained ? cfg.penalty_start : 0.0;

  OcpSolution sol;
  sol.status = SolveStatus::MaxIter;
  sol.trace.push_back({cost_of_trajectory(problem, x, u) +
                           penalty_of_trajectory(problem, x, rho),
                       std::numeric_limits<double>::infinity(), rho});

  Eigen::VectorXd g;
  Eigen::MatrixXd h;
  double kkt = std::numeric_limits<double>::infinity();
  int iter = 0;
  int rho_doublings = 0;

  while (iter < cfg.max_iters) {
    assemble(problem, x, u, rho, &g, &h);
    kkt = projected_gradient_norm(u_vec, g, lb, ub);

    if (kkt < cfg.kkt_tol) {
      const double viol = max_violation(problem, x);
      if (!constrained || viol <= cfg.collision_tol) {
        sol.status = SolveStatus::Converged;
        break;
      }
      if (rho >= cfg.penalty_cap) {
        // Penalty weights exhausted with the constraint still violated.
        sol.status = SolveStatus::Infeasible;
        break;
      }
      rho = std::min(rho * 2.0, cfg.penalty_cap);
      if (++rho_doublings > 64) {
        sol.status = SolveStatus::Infeasible;
        break;
      }
      sol.trace.push_back({cost_of_trajectory(problem, x, u) +
                               penalty_of_trajectory(problem, x, rho),
                           kkt, rho});
      continue;
    }

    const auto qp = solve_box_qp(h, g, lb - u_vec, ub - u_vec);
    const Eigen::VectorXd& delta = qp.x;
    const double predicted =
        -(g.dot(delta) + 0.5 * delta.dot(h.selfadjointView<Eigen::Lower>() * delta));

    if (delta.lpNorm<Eigen::Infinity>() < 1e-14) {
      const double viol = max_violation(problem, x);
      if (constrained && viol > cfg.collision_tol && rho < cfg.penalty_cap) {
        rho = std::min(rho * 2.0, cfg.penalty_cap);
        continue;
      }
      sol.status = constrained && viol > cfg.collision_tol
                       ? SolveStatus::Infeasible
                       : SolveStatus::MaxIter;
      break;
    }

    const double m0 = cost_of_trajectory(problem, x, u) +
                      penalty_of_trajectory(problem, x, rho);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < cfg.line_search_max; ++ls, alpha *= 0.5) {
      const Eigen::VectorXd u_try = u_vec + alpha * delta;
      const auto u_try_seq = unstack_inputs(u_try);
      const auto x_try = rollout(problem, u_try_seq);
      const double m_try = cost_of_trajectory(problem, x_try, u_try_seq) +
                           penalty_of_trajectory(problem, x_try, rho);
      if (m_try <= m0 - 1e-4 * alpha * std::max(predicted, 0.0)) {
        u_vec = u_try;
        u = u_try_seq;
        x = x_try;
        sol.trace.push_back({m_try, kkt, rho});
        accepted = true;
        break;
      }
    }
    ++iter;
    if (!accepted) {
      const double viol = max_violation(problem, x);
      if (constrained && viol > cfg.collision_tol && rho < cfg.penalty_cap) {
        rho = std::min(rho * 2.0, cfg.penalty_cap);
        continue;
      }
      sol.status = constrained && viol > cfg.collision_tol
                       ? SolveStatus::Infeasible
                       : SolveStatus::MaxIter;
      break;
    }
  }

  // Final stationarity measure under the final penalty weight.
  assemble(problem, x, u, rho, &g, nullptr);
  sol.kkt_residual = projected_gradient_norm(u_vec, g, lb, ub);
  if (sol.status == SolveStatus::MaxIter && sol.kkt_residual < cfg.kkt_tol &&
      (!constrained || max_violation(problem, x) <= cfg.collision_tol)) {
    sol.status = SolveStatus::Converged;
  }
  sol.u_seq = std::move(u);
  sol.x_pred = std::move(x);
  sol.cost = cost_of_trajectory(problem, sol.x_pred, sol.u_seq);
  sol.iterations = iter;
  sol.min_collision_residual =
      min_collision_residual(sol.x_pred, problem.obstacles);
  return sol;
}

}  // namespace sff::nmpc
