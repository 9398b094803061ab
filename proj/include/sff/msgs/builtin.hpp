#pragma once

#include "sff/msgs/schema.hpp"

#include <string_view>

namespace sff::msgs {

/// Schema text for the message set shipped with the repo (SCStates,
/// CmdForce, CmdTorque, ThrOnTime, Clock, Heartbeat, PredictedTrajectory).
/// The same text lives in schemas/builtin.msg for external tooling.
std::string_view builtin_schema_text();

/// Registry preloaded with the built-in set.
SchemaRegistry builtin_registry();

}  // namespace sff::msgs
