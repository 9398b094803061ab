#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace sff::dynamics {

template <class S>
using Vec3T = Eigen::Matrix<S, 3, 1>;
using Vec3 = Vec3T<double>;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Dot product written out so it stays analytic for complex scalars
/// (Eigen's dot() conjugates the left operand).
template <class S>
S dot3(const Vec3T<S>& a, const Vec3T<S>& b) {
  return a(0) * b(0) + a(1) * b(1) + a(2) * b(2);
}

template <class S>
Vec3T<S> cross3(const Vec3T<S>& a, const Vec3T<S>& b) {
  return Vec3T<S>(a(1) * b(2) - a(2) * b(1),
                  a(2) * b(0) - a(0) * b(2),
                  a(0) * b(1) - a(1) * b(0));
}

/// Unit quaternion, scalar-first (w, x, y, z), Hamilton product convention.
/// Represents the attitude of the body frame relative to the Hill frame:
/// rotate() maps body-frame coordinates into Hill-frame coordinates.
template <class S>
struct QuatT {
  S w{1}, x{0}, y{0}, z{0};

  static QuatT identity() { return QuatT{S(1), S(0), S(0), S(0)}; }

  QuatT conjugate() const { return QuatT{w, -x, -y, -z}; }

  /// Analytic squared norm (no conjugation), valid for complex-step inputs.
  S norm_sq() const { return w * w + x * x + y * y + z * z; }

  QuatT normalized() const {
    using std::sqrt;
    const S n = sqrt(norm_sq());
    return QuatT{w / n, x / n, y / n, z / n};
  }

  /// Hamilton product q ⊗ r.
  QuatT operator*(const QuatT& r) const {
    return QuatT{w * r.w - x * r.x - y * r.y - z * r.z,
                 w * r.x + x * r.w + y * r.z - z * r.y,
                 w * r.y - x * r.z + y * r.w + z * r.x,
                 w * r.z + x * r.y - y * r.x + z * r.w};
  }

  Vec3T<S> vec() const { return Vec3T<S>(x, y, z); }

  /// Rotation matrix R such that v_hill = R * v_body.
  Eigen::Matrix<S, 3, 3> to_rotation() const {
    Eigen::Matrix<S, 3, 3> R;
    const S ww = w * w, xx = x * x, yy = y * y, zz = z * z;
    R(0, 0) = ww + xx - yy - zz;
    R(0, 1) = S(2) * (x * y - w * z);
    R(0, 2) = S(2) * (x * z + w * y);
    R(1, 0) = S(2) * (x * y + w * z);
    R(1, 1) = ww - xx + yy - zz;
    R(1, 2) = S(2) * (y * z - w * x);
    R(2, 0) = S(2) * (x * z - w * y);
    R(2, 1) = S(2) * (y * z + w * x);
    R(2, 2) = ww - xx - yy + zz;
    return R;
  }

  Vec3T<S> rotate(const Vec3T<S>& v_body) const {
    // q ⊗ (0, v) ⊗ q*
    const QuatT qv{S(0), v_body(0), v_body(1), v_body(2)};
    const QuatT r = (*this) * qv * conjugate();
    return Vec3T<S>(r.x, r.y, r.z);
  }

  /// Rotation about the +z axis (yaw), radians.
  static QuatT from_yaw(S yaw) {
    using std::cos;
    using std::sin;
    return QuatT{cos(yaw / S(2)), S(0), S(0), sin(yaw / S(2))};
  }
};
using Quat = QuatT<double>;

inline double quat_angle(const Quat& a, const Quat& b) {
  const Quat e = a * b.conjugate();
  const double c = std::min(1.0, std::abs(e.w));
  return 2.0 * std::acos(c);
}

/// Leader position/velocity in the inertial (ECI) frame.
struct InertialState {
  Vec3 p{Vec3::Zero()};
  Vec3 v{Vec3::Zero()};
};

/// Rotating orbital frame axes expressed in ECI coordinates.
struct HillFrame {
  Vec3 x_hat, y_hat, z_hat;
  Vec3 origin;
};

/// 13-component spacecraft state: Hill-frame position/velocity,
/// Hill-to-body attitude quaternion (scalar first), body angular rate.
template <class S>
struct RigidBodyStateT {
  Vec3T<S> p_h{Vec3T<S>::Zero()};
  Vec3T<S> v_h{Vec3T<S>::Zero()};
  QuatT<S> q_hb{QuatT<S>::identity()};
  Vec3T<S> omega_b{Vec3T<S>::Zero()};

  static constexpr int kDim = 13;

  Eigen::Matrix<S, 13, 1> to_vector() const {
    Eigen::Matrix<S, 13, 1> v;
    v << p_h, v_h, q_hb.w, q_hb.x, q_hb.y, q_hb.z, omega_b;
    return v;
  }

  static RigidBodyStateT from_vector(const Eigen::Matrix<S, 13, 1>& v) {
    RigidBodyStateT s;
    s.p_h = v.template segment<3>(0);
    s.v_h = v.template segment<3>(3);
    s.q_hb = QuatT<S>{v(6), v(7), v(8), v(9)};
    s.omega_b = v.template segment<3>(10);
    return s;
  }
};
using RigidBodyState = RigidBodyStateT<double>;

/// Body-frame force [N] and torque [N·m]; the control input.
template <class S>
struct WrenchT {
  Vec3T<S> force_b{Vec3T<S>::Zero()};
  Vec3T<S> torque_b{Vec3T<S>::Zero()};

  Eigen::Matrix<S, 6, 1> to_vector() const {
    Eigen::Matrix<S, 6, 1> v;
    v << force_b, torque_b;
    return v;
  }
  static WrenchT from_vector(const Eigen::Matrix<S, 6, 1>& v) {
    return WrenchT{v.template segment<3>(0), v.template segment<3>(3)};
  }
};
using Wrench = WrenchT<double>;

struct OrbitParams {
  double mu{3.986004418e14};  // m^3/s^2, WGS-84 Earth
  double a{6.778e6};          // m
  double n{0.0};              // rad/s, sqrt(mu/a^3)

  static OrbitParams from_mu_a(double mu, double a);
  /// Direct mean-motion construction (mu/a left at defaults), for tests
  /// and planar scenarios that do not care about the underlying orbit.
  static OrbitParams from_mean_motion(double n) {
    OrbitParams p;
    p.n = n;
    return p;
  }
};

struct BodyParams {
  double mass{1.0};
  Mat3 inertia{Mat3::Identity()};
  Mat3 inertia_inv{Mat3::Identity()};

  /// Validates mass > 0, symmetry within 1e-12 and positive definiteness.
  static BodyParams make(double mass, const Mat3& inertia);
};

class DegenerateOrbitError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class SingularInertiaError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sff::dynamics
