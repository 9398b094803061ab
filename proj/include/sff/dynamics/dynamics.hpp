#pragma once

#include "sff/dynamics/ode.hpp"
#include "sff/dynamics/types.hpp"

namespace sff::dynamics {

/// Hill frame of an orbiting body: x radial, z along the specific angular
/// momentum, y completing the right-handed triad.
/// Throws DegenerateOrbitError when p × v vanishes (radial trajectory).
HillFrame build_hill_frame(const InertialState& state);

/// n = sqrt(mu / a^3). Throws std::domain_error on non-positive input.
double mean_motion(double mu, double a);

/// CW acceleration with the body force rotated into the Hill frame.
Vec3 cw_accel(const RigidBodyState& state, const Wrench& wrench, double n,
              double mass);

struct AttitudeDeriv {
  Quat q_dot;
  Vec3 omega_dot;
};

/// Quaternion kinematics and Euler's rotational dynamics.
/// Throws SingularInertiaError if the inertia matrix is not invertible.
AttitudeDeriv attitude_deriv(const Quat& q_hb, const Vec3& omega_b,
                             const Vec3& torque_b, const Mat3& inertia);

/// One RK4 step of the full 13-state; quaternion renormalized afterwards.
RigidBodyState step_rk4(const RigidBodyState& state, const Wrench& wrench,
                        const OrbitParams& orbit, const BodyParams& body,
                        double dt);

/// Exact state-transition matrix of the unforced CW system over dt,
/// state ordering (p, v). Used as an independent oracle in tests.
Mat6 cw_stm(double n, double dt);

/// Keplerian elements (angles in radians) to inertial position/velocity,
/// evaluated at true anomaly nu.
InertialState kepler_to_cartesian(double mu, double a, double e, double inc,
                                  double raan, double argp, double nu);

}  // namespace sff::dynamics
