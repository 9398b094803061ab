#include "sff/dynamics/dynamics.hpp"

#include <cmath>

namespace sff::dynamics {

OrbitParams OrbitParams::from_mu_a(double mu, double a) {
  OrbitParams p;
  p.mu = mu;
  p.a = a;
  p.n = mean_motion(mu, a);
  return p;
}

BodyParams BodyParams::make(double mass, const Mat3& inertia) {
  if (mass <= 0.0) {
    throw std::domain_error("BodyParams: mass must be positive");
  }
  if ((inertia - inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw std::domain_error("BodyParams: inertia must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat3> es(inertia);
  if (es.eigenvalues().minCoeff() <= 0.0) {
    throw SingularInertiaError("BodyParams: inertia must be positive definite");
  }
  BodyParams b;
  b.mass = mass;
  b.inertia = inertia;
  b.inertia_inv = inertia.inverse();
  return b;
}

HillFrame build_hill_frame(const InertialState& state) {
  const double pn = state.p.norm();
  if (pn <= 0.0) {
    throw DegenerateOrbitError("build_hill_frame: zero position vector");
  }
  const Vec3 h = state.p.cross(state.v);
  const double hn = h.norm();
  if (hn <= 1e-12 * std::max(1.0, pn * state.v.norm())) {
    throw DegenerateOrbitError(
        "build_hill_frame: radial trajectory, angular momentum vanishes");
  }
  HillFrame f;
  f.x_hat = state.p / pn;
  f.z_hat = h / hn;
  f.y_hat = f.z_hat.cross(f.x_hat);
  f.origin = state.p;
  return f;
}

double mean_motion(double mu, double a) {
  if (mu <= 0.0 || a <= 0.0) {
    throw std::domain_error("mean_motion: mu and a must be positive");
  }
  return std::sqrt(mu / (a * a * a));
}

Vec3 cw_accel(const RigidBodyState& state, const Wrench& wrench, double n,
              double mass) {
  if (mass <= 0.0) {
    throw std::domain_error("cw_accel: mass must be positive");
  }
  return cw_accel_t<double>(state, wrench, n, mass);
}

AttitudeDeriv attitude_deriv(const Quat& q_hb, const Vec3& omega_b,
                             const Vec3& torque_b, const Mat3& inertia) {
  Eigen::FullPivLU<Mat3> lu(inertia);
  if (!lu.isInvertible()) {
    throw SingularInertiaError("attitude_deriv: inertia not invertible");
  }
  AttitudeDeriv d;
  const Quat q_omega{0.0, omega_b(0), omega_b(1), omega_b(2)};
  const Quat qd = q_hb * q_omega;
  d.q_dot = Quat{qd.w / 2, qd.x / 2, qd.y / 2, qd.z / 2};
  d.omega_dot = lu.solve(torque_b - omega_b.cross(inertia * omega_b));
  return d;
}

RigidBodyState step_rk4(const RigidBodyState& state, const Wrench& wrench,
                        const OrbitParams& orbit, const BodyParams& body,
                        double dt) {
  if (dt <= 0.0) {
    throw std::domain_error("step_rk4: dt must be positive");
  }
  return step_rk4_t<double>(state, wrench, orbit, body, dt);
}

Mat6 cw_stm(double n, double dt) {
  Mat6 m = Mat6::Identity();
  if (dt == 0.0) {
    return m;
  }
  const double s = std::sin(n * dt);
  const double c = std::cos(n * dt);
  const double t = dt;
  m.setZero();
  m(0, 0) = 4.0 - 3.0 * c;
  m(0, 3) = s / n;
  m(0, 4) = 2.0 * (1.0 - c) / n;
  m(1, 0) = 6.0 * (s - n * t);
  m(1, 1) = 1.0;
  m(1, 3) = -2.0 * (1.0 - c) / n;
  m(1, 4) = (4.0 * s - 3.0 * n * t) / n;
  m(2, 2) = c;
  m(2, 5) = s / n;
  m(3, 0) = 3.0 * n * s;
  m(3, 3) = c;
  m(3, 4) = 2.0 * s;
  m(4, 0) = -6.0 * n * (1.0 - c);
  m(4, 3) = -2.0 * s;
  m(4, 4) = 4.0 * c - 3.0;
  m(5, 2) = -n * s;
  m(5, 5) = c;
  return m;
}

InertialState kepler_to_cartesian(double mu, double a, double e, double inc,
                                  double raan, double argp, double nu) {
  const double p_semi = a * (1.0 - e * e);
  const double r = p_semi / (1.0 + e * std::cos(nu));

  // Perifocal coordinates.
  const Vec3 r_pf(r * std::cos(nu), r * std::sin(nu), 0.0);
  const double vc = std::sqrt(mu / p_semi);
  const Vec3 v_pf(-vc * std::sin(nu), vc * (e + std::cos(nu)), 0.0);

  const Eigen::AngleAxisd R3_raan(raan, Vec3::UnitZ());
  const Eigen::AngleAxisd R1_inc(inc, Vec3::UnitX());
  const Eigen::AngleAxisd R3_argp(argp, Vec3::UnitZ());
  const Mat3 rot = (R3_raan * R1_inc * R3_argp).toRotationMatrix();

  InertialState s;
  s.p = rot * r_pf;
  s.v = rot * v_pf;
  return s;
}

}  // namespace sff::dynamics
