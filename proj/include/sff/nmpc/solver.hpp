#pragma once

#include "sff/nmpc/ocp.hpp"

#include <Eigen/Dense>

namespace sff::nmpc {

struct SolverConfig {
  double kkt_tol{1e-4};
  int max_iters{50};
  double penalty_start{1e3};
  double penalty_cap{1e9};
  /// Accepted predicted constraint violation, meters.
  double collision_tol{0.05};
  int line_search_max{14};
};

/// One step of the prediction model: RK4 over dt with quaternion
/// renormalization.
RigidBodyState discrete_step(const RigidBodyState& x, const Wrench& u,
                             const OcpProblem& p);

/// Forward rollout of an input sequence from the problem's initial state.
std::vector<RigidBodyState> rollout(const OcpProblem& p,
                                    const std::vector<Wrench>& u_seq);

/// Jacobians of discrete_step by complex-step differentiation
/// (machine-accurate; no step-size tuning).
void linearize_step(const RigidBodyState& x, const Wrench& u,
                    const OcpProblem& p, Eigen::Matrix<double, 13, 13>* a,
                    Eigen::Matrix<double, 13, 6>* b);

/// Objective (stage + terminal, no penalty) of the rollout of u_seq.
double total_cost(const OcpProblem& p, const std::vector<Wrench>& u_seq);

/// Exact gradient of total_cost with respect to the stacked 6N input
/// vector, via the chain rule over complex-step sensitivities.
Eigen::VectorXd cost_gradient(const OcpProblem& p,
                              const std::vector<Wrench>& u_seq);

/// Gauss-Newton SQP over the condensed shooting formulation: iterates are
/// input sequences with states re-rolled every step, so every returned
/// solution is dynamically feasible regardless of status. Box input
/// bounds are handled by an active-set QP, collision constraints by an
/// exterior quadratic penalty with doubling weight.
OcpSolution solve_ocp(const OcpProblem& problem,
                      const OcpSolution* warm_start = nullptr,
                      const SolverConfig& cfg = {});

}  // namespace sff::nmpc
