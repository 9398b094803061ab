#pragma once

#include "sff/dynamics/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sff::nmpc {

using dynamics::BodyParams;
using dynamics::Mat3;
using dynamics::OrbitParams;
using dynamics::Quat;
using dynamics::RigidBodyState;
using dynamics::Vec3;
using dynamics::Wrench;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Stage weights; the terminal weight P mirrors Q scaled by
/// terminal_scale (20 by default).
struct OcpWeights {
  Mat3 q_p{Mat3::Identity()};
  Mat3 q_v{30.0 * Mat3::Identity()};
  double q_q{1000.0};
  Mat3 q_omega{10.0 * Mat3::Identity()};
  Mat6 r{(Eigen::Matrix<double, 6, 1>() << 0.2, 0.2, 0.2, 100.0, 100.0, 100.0)
             .finished()
             .asDiagonal()};
  double terminal_scale{20.0};

  /// All blocks must be positive semi-definite.
  void validate() const;
};

/// Per-axis symmetric input bounds.
struct InputBounds {
  Vec3 force_max{Vec3::Constant(3.0)};
  Vec3 torque_max{Vec3::Constant(0.51)};

  Eigen::Matrix<double, 6, 1> upper() const {
    Eigen::Matrix<double, 6, 1> u;
    u << force_max, torque_max;
    return u;
  }
};

/// Another agent's shared prediction used as a moving obstacle.
struct ObstaclePrediction {
  std::string agent_id;
  std::vector<Vec3> positions;  // N+1 entries
  double d_min{0.4};
};

struct OcpProblem {
  RigidBodyState x0;
  std::vector<RigidBodyState> refs;  // N+1 reference states
  OcpWeights weights;
  int horizon{30};
  double dt{0.2};
  InputBounds bounds;
  double v_max{0.0};  // 0 disables the velocity bound
  std::vector<ObstaclePrediction> obstacles;
  OrbitParams orbit;
  BodyParams body;

  /// Throws std::invalid_argument on violated invariants (ref count,
  /// non-unit reference quaternions, negative d_min, obstacle lengths).
  void validate() const;
};

enum class SolveStatus { Converged, MaxIter, Infeasible };

const char* to_string(SolveStatus s);

struct IterationRecord {
  double merit;
  double kkt;
  double penalty_weight;
};

struct OcpSolution {
  std::vector<Wrench> u_seq;            // N inputs
  std::vector<RigidBodyState> x_pred;   // N+1 states, x_pred[0] == x0
  double cost{0.0};
  double kkt_residual{0.0};
  int iterations{0};
  SolveStatus status{SolveStatus::MaxIter};
  double min_collision_residual{std::numeric_limits<double>::infinity()};
  std::vector<IterationRecord> trace;
};

/// Desired relative formation pose of a follower w.r.t. the leader.
struct FormationOffset {
  Vec3 dp{Vec3::Zero()};
  Quat dq{Quat::identity()};
};

/// Quadratic stage penalty; the attitude term is
/// q_q * (1 - (q^T q_ref)^2)^2, invariant under q -> -q.
double stage_cost(const RigidBodyState& x, const Wrench& u,
                  const RigidBodyState& ref, const OcpWeights& w);

/// Stage structure without the input term, scaled by terminal_scale.
double terminal_cost(const RigidBodyState& x_n, const RigidBodyState& ref_n,
                     const OcpWeights& w);

/// Follower references from the leader's shared prediction: position
/// offset applied, velocities copied, attitude composed with the offset.
/// Throws std::invalid_argument on an empty prediction.
std::vector<RigidBodyState> build_follower_refs(
    const std::vector<RigidBodyState>& leader_pred,
    const FormationOffset& offset);

/// Signed separation margins r(n, b) = ||p(n) - p_b(n)|| - d_min for every
/// step and obstacle; the constraint holds iff every residual is >= 0.
std::vector<double> collision_residuals(
    const std::vector<RigidBodyState>& x_pred,
    const std::vector<ObstaclePrediction>& obstacles);

double min_collision_residual(const std::vector<RigidBodyState>& x_pred,
                              const std::vector<ObstaclePrediction>& obstacles);

}  // namespace sff::nmpc
