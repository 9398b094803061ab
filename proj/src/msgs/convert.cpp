#include "sff/msgs/convert.hpp"

#include <stdexcept>

namespace sff::msgs {

using dynamics::RigidBodyState;
using dynamics::Vec3;

namespace {

std::vector<double> vec3_to_array(const Vec3& v) { return {v(0), v(1), v(2)}; }

Vec3 array_to_vec3(const std::vector<double>& a) {
  if (a.size() != 3) throw std::invalid_argument("expected 3-element array");
  return Vec3(a[0], a[1], a[2]);
}

}  // namespace

MessageValue to_scstates(const RigidBodyState& x, std::int64_t stamp_ns) {
  MessageValue v("SCStates");
  v.set("p_h", vec3_to_array(x.p_h));
  v.set("v_h", vec3_to_array(x.v_h));
  v.set("q_hb", std::vector<double>{x.q_hb.w, x.q_hb.x, x.q_hb.y, x.q_hb.z});
  v.set("omega_b", vec3_to_array(x.omega_b));
  v.set("stamp_ns", stamp_ns);
  return v;
}

RigidBodyState from_scstates(const MessageValue& v, std::int64_t* stamp_ns) {
  RigidBodyState x;
  x.p_h = array_to_vec3(v.get<std::vector<double>>("p_h"));
  x.v_h = array_to_vec3(v.get<std::vector<double>>("v_h"));
  const auto& q = v.get<std::vector<double>>("q_hb");
  if (q.size() != 4) throw std::invalid_argument("q_hb must have 4 elements");
  x.q_hb = dynamics::Quat{q[0], q[1], q[2], q[3]};
  x.omega_b = array_to_vec3(v.get<std::vector<double>>("omega_b"));
  if (stamp_ns) *stamp_ns = v.get<std::int64_t>("stamp_ns");
  return x;
}

MessageValue to_cmd_force(const Vec3& force_b, std::int64_t stamp_ns) {
  MessageValue v("CmdForce");
  v.set("force_b", vec3_to_array(force_b));
  v.set("stamp_ns", stamp_ns);
  return v;
}

MessageValue to_cmd_torque(const Vec3& torque_b, std::int64_t stamp_ns) {
  MessageValue v("CmdTorque");
  v.set("torque_b", vec3_to_array(torque_b));
  v.set("stamp_ns", stamp_ns);
  return v;
}

Vec3 from_cmd_force(const MessageValue& v, std::int64_t* stamp_ns) {
  if (stamp_ns) *stamp_ns = v.get<std::int64_t>("stamp_ns");
  return array_to_vec3(v.get<std::vector<double>>("force_b"));
}

Vec3 from_cmd_torque(const MessageValue& v, std::int64_t* stamp_ns) {
  if (stamp_ns) *stamp_ns = v.get<std::int64_t>("stamp_ns");
  return array_to_vec3(v.get<std::vector<double>>("torque_b"));
}

MessageValue to_clock(std::int64_t sim_time_ns) {
  MessageValue v("Clock");
  v.set("sim_time_ns", sim_time_ns);
  return v;
}

std::int64_t from_clock(const MessageValue& v) {
  return v.get<std::int64_t>("sim_time_ns");
}

MessageValue to_heartbeat(const std::string& sender_id, std::int64_t counter) {
  MessageValue v("Heartbeat");
  v.set("sender_id", sender_id);
  v.set("counter", counter);
  return v;
}

MessageValue to_thr_on_time(const std::vector<double>& on_time_s, double window_s,
                            std::int64_t stamp_ns) {
  MessageValue v("ThrOnTime");
  v.set("on_time", on_time_s);
  v.set("window", window_s);
  v.set("stamp_ns", stamp_ns);
  return v;
}

MessageValue to_predicted_trajectory(const StampedTrajectory& traj) {
  if (traj.t_ns.size() != traj.states.size()) {
    throw std::invalid_argument("trajectory stamp/state count mismatch");
  }
  MessageValue v("PredictedTrajectory");
  v.set("agent", traj.agent);
  v.set("stamp_ns", traj.stamp_ns);
  v.set("t_ns", traj.t_ns);
  std::vector<double> flat;
  flat.reserve(traj.states.size() * RigidBodyState::kDim);
  for (const auto& s : traj.states) {
    const auto x = s.to_vector();
    for (int i = 0; i < RigidBodyState::kDim; ++i) flat.push_back(x(i));
  }
  v.set("states", std::move(flat));
  return v;
}

StampedTrajectory from_predicted_trajectory(const MessageValue& v) {
  StampedTrajectory traj;
  traj.agent = v.get<std::string>("agent");
  traj.stamp_ns = v.get<std::int64_t>("stamp_ns");
  traj.t_ns = v.get<std::vector<std::int64_t>>("t_ns");
  const auto& flat = v.get<std::vector<double>>("states");
  constexpr int d = RigidBodyState::kDim;
  if (flat.size() != traj.t_ns.size() * d) {
    throw std::invalid_argument("trajectory state array length mismatch");
  }
  traj.states.reserve(traj.t_ns.size());
  for (std::size_t k = 0; k < traj.t_ns.size(); ++k) {
    Eigen::Matrix<double, d, 1> x;
    for (int i = 0; i < d; ++i) x(i) = flat[k * d + i];
    traj.states.push_back(RigidBodyState::from_vector(x));
  }
  return traj;
}

}  // namespace sff::msgs
