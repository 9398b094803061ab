#include "sff/dynamics/dynamics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace sff::dynamics;

namespace {

constexpr double kPi = 3.14159265358979323846;

RigidBodyState random_state(std::mt19937& rng, double pos_scale = 10.0,
                            double vel_scale = 0.1, double rate_scale = 0.3) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RigidBodyState x;
  x.p_h = Vec3(u(rng), u(rng), u(rng)) * pos_scale;
  x.v_h = Vec3(u(rng), u(rng), u(rng)) * vel_scale;
  x.q_hb = Quat{1.0 + u(rng), u(rng), u(rng), u(rng)}.normalized();
  x.omega_b = Vec3(u(rng), u(rng), u(rng)) * rate_scale;
  return x;
}

}  // namespace

TEST_CASE("hill frame axis-aligned circular case") {
  const auto f = build_hill_frame({Vec3(7e6, 0, 0), Vec3(0, 7.5e3, 0)});
  CHECK((f.x_hat - Vec3(1, 0, 0)).norm() < 1e-14);
  CHECK((f.y_hat - Vec3(0, 1, 0)).norm() < 1e-14);
  CHECK((f.z_hat - Vec3(0, 0, 1)).norm() < 1e-14);
}

TEST_CASE("hill frame rotated 90 degrees") {
  const auto f = build_hill_frame({Vec3(0, 7e6, 0), Vec3(-7.5e3, 0, 0)});
  CHECK((f.x_hat - Vec3(0, 1, 0)).norm() < 1e-14);
  CHECK((f.z_hat - Vec3(0, 0, 1)).norm() < 1e-14);
  CHECK((f.y_hat - Vec3(-1, 0, 0)).norm() < 1e-14);
}

TEST_CASE("hill frame out-of-plane velocity against cross-product oracle") {
  // p=(r,0,0), v=(0,0,s): h = p x v = (0, -rs, 0), y = z x x.
  const double r = 7e6, s = 7.5e3;
  const Vec3 p(r, 0, 0), v(0, 0, s);
  const auto f = build_hill_frame({p, v});
  const Vec3 z_expect = p.cross(v).normalized();
  CHECK((f.z_hat - z_expect).norm() < 1e-14);
  CHECK((f.z_hat - Vec3(0, -1, 0)).norm() < 1e-14);
  CHECK((f.y_hat - z_expect.cross(p.normalized())).norm() < 1e-14);
  CHECK((f.y_hat - Vec3(0, 0, 1)).norm() < 1e-14);
  // Right-handedness holds regardless.
  CHECK((f.x_hat.cross(f.y_hat) - f.z_hat).norm() < 1e-12);
}

TEST_CASE("hill frame rejects degenerate radial trajectory") {
  CHECK_THROWS_AS(build_hill_frame({Vec3(7e6, 0, 0), Vec3(7.5e3, 0, 0)}),
                  DegenerateOrbitError);
  CHECK_THROWS_AS(build_hill_frame({Vec3::Zero(), Vec3(1, 0, 0)}),
                  DegenerateOrbitError);
}

TEST_CASE("hill frame invariants on randomized inputs") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    InertialState s;
    s.p = Vec3(u(rng), u(rng), u(rng)) * 7e6 + Vec3(8e6, 0, 0);
    s.v = Vec3(u(rng), u(rng), u(rng)) * 7e3 + Vec3(0, 8e3, 0);
    if (s.p.cross(s.v).norm() < 1e3) continue;
    const auto f = build_hill_frame(s);
    CHECK(std::abs(f.x_hat.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.y_hat.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.z_hat.norm() - 1.0) < 1e-12);
    CHECK(std::abs(f.x_hat.dot(f.y_hat)) < 1e-12);
    CHECK(std::abs(f.x_hat.dot(f.z_hat)) < 1e-12);
    CHECK(std::abs(f.y_hat.dot(f.z_hat)) < 1e-12);
    CHECK((f.x_hat.cross(f.y_hat) - f.z_hat).norm() < 1e-12);
  }
}

TEST_CASE("mean motion") {
  CHECK(mean_motion(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(mean_motion(4.0, 1.0) == doctest::Approx(2.0).epsilon(1e-15));
  // WGS-84 mu with the near-circular LEO semi-major axis.
  CHECK(mean_motion(3.986004418e14, 6.778e6) ==
        doctest::Approx(1.1314009553257084e-3).epsilon(1e-12));
  CHECK_THROWS_AS(mean_motion(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(mean_motion(1.0, 0.0), std::domain_error);
}

TEST_CASE("orbit params consistency") {
  const auto op = OrbitParams::from_mu_a(3.986004418e14, 6.778e6);
  CHECK(std::abs(op.n * op.n * op.a * op.a * op.a - op.mu) / op.mu < 1e-9);
}

TEST_CASE("cw acceleration terms") {
  RigidBodyState x;
  Wrench u;
  CHECK(cw_accel(x, u, 1e-3, 1.0).norm() == 0.0);

  x.p_h = Vec3(1, 0, 0);
  Vec3 a = cw_accel(x, u, 1e-3, 1.0);
  CHECK(a(0) == doctest::Approx(3e-6).epsilon(1e-12));
  CHECK(a(1) == 0.0);
  CHECK(a(2) == 0.0);

  x.p_h = Vec3(0, 0, 1);
  a = cw_accel(x, u, 1e-3, 1.0);
  CHECK(a(2) == doctest::Approx(-1e-6).epsilon(1e-12));

  // Body force is rotated into the Hill frame before entering the model.
  x.p_h.setZero();
  x.q_hb = Quat::from_yaw(kPi / 2);
  u.force_b = Vec3(1, 0, 0);
  a = cw_accel(x, u, 0.0, 2.0);
  CHECK(a(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(a(1) == doctest::Approx(0.5).epsilon(1e-12));

  CHECK_THROWS_AS(cw_accel(x, u, 1e-3, 0.0), std::domain_error);
}

TEST_CASE("cw acceleration linear in state for fixed wrench") {
  std::mt19937 rng(3);
  Wrench u;
  u.force_b = Vec3(0.7, -0.2, 0.1);
  const double n = 1.1314e-3, m = 17.8;
  for (int i = 0; i < 200; ++i) {
    RigidBodyState x = random_state(rng);
    const double alpha = 0.37;
    RigidBodyState xs = x;
    xs.p_h *= alpha;
    xs.v_h *= alpha;
    const Vec3 f_h = x.q_hb.rotate(u.force_b) / m;
    const Vec3 lhs = cw_accel(xs, u, n, m) - alpha * cw_accel(x, u, n, m);
    CHECK((lhs - (1.0 - alpha) * f_h).norm() < 1e-12);
  }
}

TEST_CASE("attitude derivative") {
  const Mat3 J = Vec3(1, 2, 3).asDiagonal();

  auto d = attitude_deriv(Quat::identity(), Vec3::Zero(), Vec3::Zero(), J);
  CHECK(d.q_dot.norm_sq() == 0.0);
  CHECK(d.omega_dot.norm() == 0.0);

  const double w = 0.4;
  d = attitude_deriv(Quat::identity(), Vec3(0, 0, w), Vec3::Zero(), J);
  CHECK(d.q_dot.w == 0.0);
  CHECK(d.q_dot.x == 0.0);
  CHECK(d.q_dot.y == 0.0);
  CHECK(d.q_dot.z == doctest::Approx(w / 2));

  d = attitude_deriv(Quat::identity(), Vec3(1, 1, 1), Vec3::Zero(), J);
  CHECK(d.omega_dot(0) == doctest::Approx(-1.0));
  CHECK(d.omega_dot(1) == doctest::Approx(1.0));
  CHECK(d.omega_dot(2) == doctest::Approx(-1.0 / 3.0));

  CHECK_THROWS_AS(
      attitude_deriv(Quat::identity(), Vec3::Zero(), Vec3::Zero(), Mat3::Zero()),
      SingularInertiaError);
}

TEST_CASE("body params validation") {
  CHECK_THROWS_AS(BodyParams::make(-1.0, Mat3::Identity()), std::domain_error);
  Mat3 j = Mat3::Identity();
  j(0, 1) = 1e-6;
  CHECK_THROWS_AS(BodyParams::make(1.0, j), std::domain_error);
  CHECK_THROWS_AS(BodyParams::make(1.0, -Mat3::Identity()), SingularInertiaError);
}

TEST_CASE("rk4 zero state stays at rest") {
  const auto orbit = OrbitParams::from_mean_motion(1.1314e-3);
  const auto body = BodyParams::make(17.8, 0.315 * Mat3::Identity());
  RigidBodyState x;
  const auto y = step_rk4(x, Wrench{}, orbit, body, 0.2);
  CHECK(y.p_h.norm() == 0.0);
  CHECK(y.v_h.norm() == 0.0);
  CHECK(y.q_hb.w == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(y.omega_b.norm() == 0.0);
  CHECK_THROWS_AS(step_rk4(x, Wrench{}, orbit, body, 0.0), std::domain_error);
}

TEST_CASE("rk4 drift-free 2:1 ellipse closes after one orbit") {
  const double n = 1.1314009553257084e-3;
  const auto orbit = OrbitParams::from_mean_motion(n);
  const auto body = BodyParams::make(17.8, 0.315 * Mat3::Identity());
  const double x0 = 1.0;
  RigidBodyState x;
  x.p_h = Vec3(x0, 0, 0);
  x.v_h = Vec3(0, -2.0 * n * x0, 0);

  const double period = 2.0 * kPi / n;
  const int steps = static_cast<int>(std::ceil(period / 0.5));
  const double dt = period / steps;
  RigidBodyState y = x;
  for (int i = 0; i < steps; ++i) y = step_rk4(y, Wrench{}, orbit, body, dt);

  const double scale = std::max(x.p_h.norm(), 1.0);
  CHECK((y.p_h - x.p_h).norm() / scale < 1e-6);
  CHECK((y.v_h - x.v_h).norm() / std::max(x.v_h.norm(), 1e-3) < 1e-6);
}

TEST_CASE("rk4 local error scales one order past fourth") {
  const auto orbit = OrbitParams::from_mean_motion(1.1314e-3);
  const auto body = BodyParams::make(1.0, Vec3(1, 2, 3).asDiagonal());
  std::mt19937 rng(11);
  RigidBodyState x = random_state(rng, 5.0, 0.05, 0.8);
  Wrench u;
  u.force_b = Vec3(0.5, -0.3, 0.2);
  u.torque_b = Vec3(0.05, 0.02, -0.04);

  auto err_vs_fine = [&](double dt) {
    // Reference: 64 substeps of the same integrator.
    RigidBodyState fine = x;
    for (int i = 0; i < 64; ++i) fine = step_rk4(fine, u, orbit, body, dt / 64);
    RigidBodyState once = step_rk4(x, u, orbit, body, dt);
    return (once.to_vector() - fine.to_vector()).norm();
  };

  const double e1 = err_vs_fine(0.8);
  const double e2 = err_vs_fine(0.4);
  // Local truncation error is O(dt^5): halving dt shrinks it ~32x.
  CHECK(e1 / e2 > 16.0);
  CHECK(e1 / e2 < 64.0);
}

TEST_CASE("quaternion norm preserved through integration") {
  const auto orbit = OrbitParams::from_mean_motion(1.1314e-3);
  const auto body = BodyParams::make(17.8, 0.315 * Mat3::Identity());
  std::mt19937 rng(23);
  for (int i = 0; i < 200; ++i) {
    RigidBodyState x = random_state(rng);
    Wrench u;
    u.torque_b = Vec3(0.1, -0.2, 0.3);
    const auto y = step_rk4(x, u, orbit, body, 0.2);
    CHECK(std::abs(std::sqrt(y.q_hb.norm_sq()) - 1.0) < 1e-9);
  }
}

TEST_CASE("unforced translational propagation matches analytic stm") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> un(1e-4, 2e-3);
  std::uniform_real_distribution<double> udt(0.05, 1.0);
  const auto body = BodyParams::make(17.8, 0.315 * Mat3::Identity());
  for (int i = 0; i < 1000; ++i) {
    const double n = un(rng);
    const double dt = udt(rng);
    const auto orbit = OrbitParams::from_mean_motion(n);
    RigidBodyState x = random_state(rng, 50.0, 0.5, 0.0);
    x.q_hb = Quat::identity();

    const auto y = step_rk4(x, Wrench{}, orbit, body, dt);
    Vec6 pv;
    pv << x.p_h, x.v_h;
    const Vec6 ref = cw_stm(n, dt) * pv;
    Vec6 got;
    got << y.p_h, y.v_h;
    CHECK((got - ref).norm() / ref.norm() < 1e-6);
  }
}

TEST_CASE("stm identity at dt zero and periodicity") {
  CHECK((cw_stm(1e-3, 0.0) - Mat6::Identity()).norm() == 0.0);

  const double n = 1.1314e-3;
  const double period = 2.0 * kPi / n;
  const Mat6 m = cw_stm(n, period);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    Vec6 x;
    x << u(rng), u(rng), u(rng), u(rng), 0.0, u(rng) * n;
    x(4) = -2.0 * n * x(0);  // drift-free along-track rate
    CHECK((m * x - x).norm() < 1e-6 * std::max(1.0, x.norm()));
  }
}

TEST_CASE("stm agrees with fine-step rk4 oracle") {
  const double n = 1.1314e-3;
  const auto orbit = OrbitParams::from_mean_motion(n);
  const auto body = BodyParams::make(1.0, Mat3::Identity());
  RigidBodyState x;
  x.p_h = Vec3(1, 0, 0);

  RigidBodyState y = x;
  const int steps = 100000;
  for (int i = 0; i < steps; ++i) y = step_rk4(y, Wrench{}, orbit, body, 1e-3);

  Vec6 pv;
  pv << x.p_h, x.v_h;
  const Vec6 ref = cw_stm(n, 100.0) * pv;
  Vec6 got;
  got << y.p_h, y.v_h;
  CHECK((got - ref).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("torque-free rotation conserves kinetic energy") {
  const Mat3 J = Vec3(1.0, 2.0, 3.0).asDiagonal();
  const auto body = BodyParams::make(1.0, J);
  const auto orbit = OrbitParams::from_mean_motion(1.1314e-3);
  RigidBodyState x;
  x.omega_b = Vec3(0.3, -0.2, 0.4);
  const double e0 = 0.5 * x.omega_b.dot(J * x.omega_b);
  for (int i = 0; i < 1000; ++i) x = step_rk4(x, Wrench{}, orbit, body, 0.01);
  const double e1 = 0.5 * x.omega_b.dot(J * x.omega_b);
  CHECK(std::abs(e1 - e0) / e0 < 1e-6);
}

TEST_CASE("quaternion double cover gives one rotation") {
  std::mt19937 rng(9);
  for (int i = 0; i < 100; ++i) {
    const Quat q = random_state(rng).q_hb;
    const Quat nq{-q.w, -q.x, -q.y, -q.z};
    CHECK((q.to_rotation() - nq.to_rotation()).norm() < 1e-14);
  }
}

TEST_CASE("keplerian conversion near-circular sanity") {
  const double mu = 3.986004418e14, a = 6.778e6;
  const auto s = kepler_to_cartesian(mu, a, 0.0, 45.0 * kPi / 180.0,
                                     270.0 * kPi / 180.0, 90.0 * kPi / 180.0, 0.0);
  CHECK(s.p.norm() == doctest::Approx(a).epsilon(1e-12));
  CHECK(s.v.norm() == doctest::Approx(std::sqrt(mu / a)).epsilon(1e-12));
  CHECK(std::abs(s.p.dot(s.v)) < 1e-3);
  const Vec3 h = s.p.cross(s.v);
  CHECK(std::acos(h.normalized()(2)) == doctest::Approx(45.0 * kPi / 180.0));
  // A Hill frame built from it is well formed.
  const auto f = build_hill_frame(s);
  CHECK((f.x_hat.cross(f.y_hat) - f.z_hat).norm() < 1e-12);
}
