#include "sff/nmpc/ocp.hpp"

#include <cmath>

namespace sff::nmpc {

namespace {

void check_psd(const Eigen::MatrixXd& m, const char* name) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.eigenvalues().minCoeff() < -1e-12) {
    throw std::invalid_argument(std::string("weight block ") + name +
                                " is not positive semi-definite");
  }
}

}  // namespace

void OcpWeights::validate() const {
  check_psd(q_p, "q_p");
  check_psd(q_v, "q_v");
  check_psd(q_omega, "q_omega");
  check_psd(r, "r");
  if (q_q < 0.0) throw std::invalid_argument("q_q must be non-negative");
  if (terminal_scale < 0.0) {
    throw std::invalid_argument("terminal_scale must be non-negative");
  }
}

void OcpProblem::validate() const {
  weights.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (dt <= 0.0) throw std::invalid_argument("dt must be positive");
  if (refs.size() != static_cast<std::size_t>(horizon) + 1) {
    throw std::invalid_argument("refs must hold horizon+1 states");
  }
  for (const auto& r : refs) {
    if (std::abs(std::sqrt(r.q_hb.norm_sq()) - 1.0) > 1e-6) {
      throw std::invalid_argument("reference quaternion not unit norm");
    }
  }
  for (const auto& o : obstacles) {
    if (o.d_min < 0.0) throw std::invalid_argument("d_min must be >= 0");
    if (o.positions.size() != static_cast<std::size_t>(horizon) + 1) {
      throw std::invalid_argument("obstacle trajectory must hold horizon+1 points");
    }
  }
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIter: return "max-iter";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {

double quadratic(const Vec3& e, const Mat3& w) { return e.dot(w * e); }

double quat_alignment_residual(const Quat& q, const Quat& q_ref) {
  const double d = q.w * q_ref.w + q.x * q_ref.x + q.y * q_ref.y + q.z * q_ref.z;
  return 1.0 - d * d;
}

double state_error_cost(const RigidBodyState& x, const RigidBodyState& ref,
                        const OcpWeights& w) {
  const double rq = quat_alignment_residual(x.q_hb, ref.q_hb);
  return quadratic(x.p_h - ref.p_h, w.q_p) + quadratic(x.v_h - ref.v_h, w.q_v) +
         w.q_q * rq * rq + quadratic(x.omega_b - ref.omega_b, w.q_omega);
}

}  // namespace

double stage_cost(const RigidBodyState& x, const Wrench& u,
                  const RigidBodyState& ref, const OcpWeights& w) {
  const auto uv = u.to_vector();
  return state_error_cost(x, ref, w) + uv.dot(w.r * uv);
}

double terminal_cost(const RigidBodyState& x_n, const RigidBodyState& ref_n,
                     const OcpWeights& w) {
  return w.terminal_scale * state_error_cost(x_n, ref_n, w);
}

std::vector<RigidBodyState> build_follower_refs(
    const std::vector<RigidBodyState>& leader_pred,
    const FormationOffset& offset) {
  if (leader_pred.empty()) {
    throw std::invalid_argument("leader prediction is empty");
  }
  std::vector<RigidBodyState> refs;
  refs.reserve(leader_pred.size());
  for (const auto& l : leader_pred) {
    RigidBodyState r;
    r.p_h = l.p_h + offset.dp;
    r.v_h = l.v_h;
    r.q_hb = (offset.dq * l.q_hb).normalized();
    r.omega_b = l.omega_b;
    refs.push_back(r);
  }
  return refs;
}

std::vector<double> collision_residuals(
    const std::vector<RigidBodyState>& x_pred,
    const std::vector<ObstaclePrediction>& obstacles) {
  std::vector<double> out;
  for (const auto& o : obstacles) {
    const std::size_t n = std::min(x_pred.size(), o.positions.size());
    for (std::size_t k = 0; k < n; ++k) {
      out.push_back((x_pred[k].p_h - o.positions[k]).norm() - o.d_min);
    }
  }
  return out;
}

double min_collision_residual(const std::vector<RigidBodyState>& x_pred,
                              const std::vector<ObstaclePrediction>& obstacles) {
  double m = std::numeric_limits<double>::infinity();
  for (double r : collision_residuals(x_pred, obstacles)) m = std::min(m, r);
  return m;
}

}  // namespace sff::nmpc
