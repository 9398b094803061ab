#pragma once

#include "sff/nmpc/ocp.hpp"
#include "sff/nmpc/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sff::nmpc {

struct MpcConfig {
  int horizon{30};
  double dt{0.2};
  OcpWeights weights;
  InputBounds bounds;
  double v_max{0.0};
  double d_min{0.4};
  OrbitParams orbit;
  BodyParams body;
  SolverConfig solver;
  /// Neighbor broadcasts older than this many control periods are
  /// extrapolated by holding their final state.
  int stale_steps{2};

  std::int64_t dt_ns() const {
    return static_cast<std::int64_t>(dt * 1e9 + 0.5);
  }
};

/// A trajectory received from another agent, stamped with the sim time of
/// its first node.
struct NeighborPrediction {
  std::string agent_id;
  std::int64_t stamp_ns{0};
  std::vector<RigidBodyState> states;
};

struct MpcStepResult {
  Wrench command;        // first input of the plan, to apply now
  OcpSolution solution;  // full plan, broadcast to the other agents
  bool degraded{false};  // previous plan reused after an infeasible solve
};

/// Receding-horizon controller for one agent. Each step builds the
/// reference horizon (waypoint hold for the leader, offset leader
/// prediction for a follower), injects neighbor predictions as moving
/// obstacles, solves the OCP warm-started from the previous solution
/// shifted by one step, and returns the first input plus the plan.
class MpcController {
 public:
  MpcController(std::string agent_id, MpcConfig cfg);

  /// Leader mode: hold a fixed reference pose over the whole horizon.
  MpcStepResult step_hold(const RigidBodyState& x, const RigidBodyState& hold_ref,
                          const std::vector<NeighborPrediction>& neighbors,
                          std::int64_t now_ns);

  /// Follower mode: track the leader's shared prediction through the
  /// formation offset.
  MpcStepResult step_follow(const RigidBodyState& x,
                            const NeighborPrediction& leader_pred,
                            const FormationOffset& offset,
                            const std::vector<NeighborPrediction>& neighbors,
                            std::int64_t now_ns);

  const std::string& agent_id() const { return agent_id_; }
  const MpcConfig& config() const { return cfg_; }
  const std::optional<OcpSolution>& previous() const { return prev_; }
  void reset() { prev_.reset(); }

  /// Aligns a broadcast to the current control instant: drop the steps
  /// that already elapsed, hold the final state to fill the horizon.
  std::vector<RigidBodyState> align_prediction(const NeighborPrediction& pred,
                                               std::int64_t now_ns) const;

 private:
  MpcStepResult run(const RigidBodyState& x, std::vector<RigidBodyState> refs,
                    const std::vector<NeighborPrediction>& neighbors,
                    std::int64_t now_ns);

  std::string agent_id_;
  MpcConfig cfg_;
  std::optional<OcpSolution> prev_;
};

/// Previous-solution warm start: inputs shifted by one step with the last
/// input repeated.
std::vector<Wrench> shift_inputs(const std::vector<Wrench>& u_seq);

}  // namespace sff::nmpc
