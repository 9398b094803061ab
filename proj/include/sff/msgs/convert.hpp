#pragma once

#include "sff/dynamics/types.hpp"
#include "sff/msgs/value.hpp"

#include <cstdint>
#include <vector>

namespace sff::msgs {

MessageValue to_scstates(const dynamics::RigidBodyState& x, std::int64_t stamp_ns);
dynamics::RigidBodyState from_scstates(const MessageValue& v,
                                       std::int64_t* stamp_ns = nullptr);

MessageValue to_cmd_force(const dynamics::Vec3& force_b, std::int64_t stamp_ns);
MessageValue to_cmd_torque(const dynamics::Vec3& torque_b, std::int64_t stamp_ns);
dynamics::Vec3 from_cmd_force(const MessageValue& v, std::int64_t* stamp_ns = nullptr);
dynamics::Vec3 from_cmd_torque(const MessageValue& v, std::int64_t* stamp_ns = nullptr);

MessageValue to_clock(std::int64_t sim_time_ns);
std::int64_t from_clock(const MessageValue& v);

MessageValue to_heartbeat(const std::string& sender_id, std::int64_t counter);

MessageValue to_thr_on_time(const std::vector<double>& on_time_s, double window_s,
                            std::int64_t stamp_ns);

/// A stamped state trajectory sharable between agents.
struct StampedTrajectory {
  std::string agent;
  std::int64_t stamp_ns{0};
  std::vector<std::int64_t> t_ns;
  std::vector<dynamics::RigidBodyState> states;
};

MessageValue to_predicted_trajectory(const StampedTrajectory& traj);
StampedTrajectory from_predicted_trajectory(const MessageValue& v);

}  // namespace sff::msgs
