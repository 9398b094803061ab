#include "sff/msgs/builtin.hpp"

namespace sff::msgs {

namespace {

constexpr std::string_view kBuiltinSchemas = R"(# Built-in message set.
# Timestamps are signed 64-bit nanoseconds of simulation time.

msg SCStates v1 { p_h: f64[3] m; v_h: f64[3] m/s; q_hb: f64[4]; omega_b: f64[3] rad/s; stamp_ns: i64 ns }

msg CmdForce v1 { force_b: f64[3] N; stamp_ns: i64 ns }

msg CmdTorque v1 { torque_b: f64[3] N*m; stamp_ns: i64 ns }

msg ThrOnTime v1 { on_time: f64[] s; window: f64 s; stamp_ns: i64 ns }

msg Clock v1 { sim_time_ns: i64 ns }

msg Heartbeat v1 { sender_id: string; counter: i64 }

# Flattened horizon: t_ns holds N+1 stamps, states holds 13 values per
# stamp in state order (p_h, v_h, q_hb, omega_b).
msg PredictedTrajectory v1 { agent: string; stamp_ns: i64 ns; t_ns: i64[]; states: f64[] }
)";

}  // namespace

std::string_view builtin_schema_text() { return kBuiltinSchemas; }

SchemaRegistry builtin_registry() {
  SchemaRegistry reg;
  reg.add_all(parse_schema_file(kBuiltinSchemas));
  return reg;
}

}  // namespace sff::msgs
