#include "sff/nmpc/controller.hpp"

#include <cmath>

namespace sff::nmpc {

MpcController::MpcController(std::string agent_id, MpcConfig cfg)
    : agent_id_(std::move(agent_id)), cfg_(std::move(cfg)) {
  cfg_.weights.validate();
}

std::vector<Wrench> shift_inputs(const std::vector<Wrench>& u_seq) {
  if (u_seq.empty()) return {};
  std::vector<Wrench> shifted(u_seq.begin() + 1, u_seq.end());
  shifted.push_back(u_seq.back());
  return shifted;
}

std::vector<RigidBodyState> MpcController::align_prediction(
    const NeighborPrediction& pred, std::int64_t now_ns) const {
  const std::size_t len = static_cast<std::size_t>(cfg_.horizon) + 1;
  std::vector<RigidBodyState> out;
  out.reserve(len);
  if (pred.states.empty()) return out;

  const double age = static_cast<double>(now_ns - pred.stamp_ns) /
                     static_cast<double>(cfg_.dt_ns());
  std::size_t shift = age > 0 ? static_cast<std::size_t>(std::llround(age)) : 0;
  if (static_cast<int>(shift) > cfg_.stale_steps) {
    // Stale broadcast: hold its final state over the whole horizon.
    shift = pred.states.size();
  }
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t idx = std::min(shift + k, pred.states.size() - 1);
    out.push_back(pred.states[idx]);
  }
  return out;
}

MpcStepResult MpcController::step_hold(
    const RigidBodyState& x, const RigidBodyState& hold_ref,
    const std::vector<NeighborPrediction>& neighbors, std::int64_t now_ns) {
  RigidBodyState ref = hold_ref;
  ref.v_h.setZero();
  ref.omega_b.setZero();
  ref.q_hb = ref.q_hb.normalized();
  std::vector<RigidBodyState> refs(cfg_.horizon + 1, ref);
  return run(x, std::move(refs), neighbors, now_ns);
}

MpcStepResult MpcController::step_follow(
    const RigidBodyState& x, const NeighborPrediction& leader_pred,
    const FormationOffset& offset,
    const std::vector<NeighborPrediction>& neighbors, std::int64_t now_ns) {
  const auto leader = align_prediction(leader_pred, now_ns);
  return run(x, build_follower_refs(leader, offset), neighbors, now_ns);
}

MpcStepResult MpcController::run(const RigidBodyState& x,
                                 std::vector<RigidBodyState> refs,
                                 const std::vector<NeighborPrediction>& neighbors,
                                 std::int64_t now_ns) {
  OcpProblem problem;
  problem.x0 = x;
  problem.refs = std::move(refs);
  problem.weights = cfg_.weights;
  problem.horizon = cfg_.horizon;
  problem.dt = cfg_.dt;
  problem.bounds = cfg_.bounds;
  problem.v_max = cfg_.v_max;
  problem.orbit = cfg_.orbit;
  problem.body = cfg_.body;
  for (const auto& nb : neighbors) {
    if (nb.agent_id == agent_id_ || nb.states.empty()) continue;
    ObstaclePrediction o;
    o.agent_id = nb.agent_id;
    o.d_min = cfg_.d_min;
    for (const auto& s : align_prediction(nb, now_ns)) o.positions.push_back(s.p_h);
    problem.obstacles.push_back(std::move(o));
  }

  OcpSolution warm;
  const OcpSolution* warm_ptr = nullptr;
  if (prev_) {
    warm.u_seq = shift_inputs(prev_->u_seq);
    warm_ptr = &warm;
  }

  MpcStepResult result;
  result.solution = solve_ocp(problem, warm_ptr, cfg_.solver);

  if (result.solution.status == SolveStatus::Infeasible && prev_) {
    // Fall back to the previous plan shifted one step with a zero input
    // appended, re-rolled from the current state.
    std::vector<Wrench> u = shift_inputs(prev_->u_seq);
    if (!u.empty()) u.back() = Wrench{};
    OcpSolution fallback;
    fallback.u_seq = std::move(u);
    fallback.x_pred = rollout(problem, fallback.u_seq);
    fallback.cost = total_cost(problem, fallback.u_seq);
    fallback.status = SolveStatus::Infeasible;
    fallback.kkt_residual = result.solution.kkt_residual;
    fallback.iterations = result.solution.iterations;
    fallback.min_collision_residual =
        min_collision_residual(fallback.x_pred, problem.obstacles);
    result.solution = std::move(fallback);
    result.degraded = true;
  }

  result.command = result.solution.u_seq.empty() ? Wrench{}
                                                 : result.solution.u_seq.front();
  prev_ = result.solution;
  (void)now_ns;
  return result;
}

}  // namespace sff::nmpc
