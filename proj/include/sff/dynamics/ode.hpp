#pragma once

#include "sff/dynamics/types.hpp"

namespace sff::dynamics {

/// Time derivative of the 13-state. Templated on the scalar so the same
/// code path serves double evaluation and complex-step differentiation.
template <class S>
struct StateDerivT {
  Vec3T<S> p_dot, v_dot;
  QuatT<S> q_dot;
  Vec3T<S> omega_dot;
};

/// Clohessy–Wiltshire acceleration of the relative translational state.
/// The commanded body-frame force is rotated into the Hill frame through
/// the attitude quaternion before entering the linearized equations.
template <class S>
Vec3T<S> cw_accel_t(const RigidBodyStateT<S>& x, const WrenchT<S>& u,
                    double n, double mass) {
  const Vec3T<S> f_h = x.q_hb.rotate(u.force_b);
  Vec3T<S> a;
  a(0) = S(2.0 * n) * x.v_h(1) + S(3.0 * n * n) * x.p_h(0) + f_h(0) / S(mass);
  a(1) = S(-2.0 * n) * x.v_h(0) + f_h(1) / S(mass);
  a(2) = S(-n * n) * x.p_h(2) + f_h(2) / S(mass);
  return a;
}

/// Multiply a real 3×3 matrix into a (possibly complex) 3-vector.
template <class S>
Vec3T<S> mat3_mul(const Mat3& m, const Vec3T<S>& v) {
  Vec3T<S> r;
  for (int i = 0; i < 3; ++i) {
    r(i) = S(m(i, 0)) * v(0) + S(m(i, 1)) * v(1) + S(m(i, 2)) * v(2);
  }
  return r;
}

template <class S>
StateDerivT<S> rigid_body_deriv(const RigidBodyStateT<S>& x,
                                const WrenchT<S>& u, double n,
                                const BodyParams& body) {
  StateDerivT<S> d;
  d.p_dot = x.v_h;
  d.v_dot = cw_accel_t(x, u, n, body.mass);

  // q̇ = ½ q ⊗ (0, ω)
  const QuatT<S> q_omega{S(0), x.omega_b(0), x.omega_b(1), x.omega_b(2)};
  const QuatT<S> qd = x.q_hb * q_omega;
  d.q_dot = QuatT<S>{qd.w / S(2), qd.x / S(2), qd.y / S(2), qd.z / S(2)};

  // ω̇ = J⁻¹(τ − ω × Jω)
  const Vec3T<S> jw = mat3_mul(body.inertia, x.omega_b);
  const Vec3T<S> rhs = u.torque_b - cross3(x.omega_b, jw);
  d.omega_dot = mat3_mul(body.inertia_inv, rhs);
  return d;
}

namespace detail {

template <class S>
RigidBodyStateT<S> add_scaled(const RigidBodyStateT<S>& x,
                              const StateDerivT<S>& d, double h) {
  RigidBodyStateT<S> r;
  r.p_h = x.p_h + S(h) * d.p_dot;
  r.v_h = x.v_h + S(h) * d.v_dot;
  r.q_hb = QuatT<S>{x.q_hb.w + S(h) * d.q_dot.w, x.q_hb.x + S(h) * d.q_dot.x,
                    x.q_hb.y + S(h) * d.q_dot.y, x.q_hb.z + S(h) * d.q_dot.z};
  r.omega_b = x.omega_b + S(h) * d.omega_dot;
  return r;
}

}  // namespace detail

/// Classical RK4 step of the 13-state ODE; the attitude quaternion is
/// renormalized after the step.
template <class S>
RigidBodyStateT<S> step_rk4_t(const RigidBodyStateT<S>& x, const WrenchT<S>& u,
                              const OrbitParams& orbit, const BodyParams& body,
                              double dt) {
  const auto k1 = rigid_body_deriv(x, u, orbit.n, body);
  const auto k2 = rigid_body_deriv(detail::add_scaled(x, k1, dt / 2), u, orbit.n, body);
  const auto k3 = rigid_body_deriv(detail::add_scaled(x, k2, dt / 2), u, orbit.n, body);
  const auto k4 = rigid_body_deriv(detail::add_scaled(x, k3, dt), u, orbit.n, body);

  RigidBodyStateT<S> r;
  const double c = dt / 6.0;
  r.p_h = x.p_h + S(c) * (k1.p_dot + S(2) * k2.p_dot + S(2) * k3.p_dot + k4.p_dot);
  r.v_h = x.v_h + S(c) * (k1.v_dot + S(2) * k2.v_dot + S(2) * k3.v_dot + k4.v_dot);
  r.q_hb = QuatT<S>{
      x.q_hb.w + S(c) * (k1.q_dot.w + S(2) * k2.q_dot.w + S(2) * k3.q_dot.w + k4.q_dot.w),
      x.q_hb.x + S(c) * (k1.q_dot.x + S(2) * k2.q_dot.x + S(2) * k3.q_dot.x + k4.q_dot.x),
      x.q_hb.y + S(c) * (k1.q_dot.y + S(2) * k2.q_dot.y + S(2) * k3.q_dot.y + k4.q_dot.y),
      x.q_hb.z + S(c) * (k1.q_dot.z + S(2) * k2.q_dot.z + S(2) * k3.q_dot.z + k4.q_dot.z)};
  r.omega_b = x.omega_b + S(c) * (k1.omega_dot + S(2) * k2.omega_dot +
                                  S(2) * k3.omega_dot + k4.omega_dot);
  r.q_hb = r.q_hb.normalized();
  return r;
}

}  // namespace sff::dynamics
