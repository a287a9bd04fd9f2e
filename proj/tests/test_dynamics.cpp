#include <doctest.h>

#include <cmath>
#include <numbers>

#include "prsbc/dynamics.hpp"

using namespace prsbc;

namespace {

RobotSpec integrator(Eigen::Vector2d goal, double meas = 0.0, double proc = 0.0) {
  RobotSpec r;
  r.goal = goal;
  r.meas_noise = Eigen::Vector2d::Constant(meas);
  r.proc_noise = Eigen::Vector2d::Constant(proc);
  return r;
}

WorldState single(const Eigen::Vector2d& p) {
  WorldState s;
  s.true_positions = {p};
  s.headings = {0.0};
  return s;
}

}  // namespace

TEST_SUITE("dynamics") {

TEST_CASE("single integrator is affine with identity input") {
  RobotSpec r = integrator({0, 0});
  AffineModel m = eval_affine(r, Eigen::Vector2d(3.0, -1.0));
  CHECK(m.drift.size() == 2);
  CHECK(m.input_matrix.rows() == 2);
  CHECK(m.input_matrix.cols() == 2);
  CHECK(m.drift.isZero(0.0));
  CHECK(m.input_matrix.isIdentity(0.0));

  r.model_kind = ModelKind::unicycle_mapped;
  AffineModel u = eval_affine(r, Eigen::Vector2d(0.0, 0.0), 0.0);
  CHECK(u.input_matrix.isIdentity(0.0));
  CHECK_THROWS_AS(eval_affine(r, Eigen::Vector2d(NAN, 0.0)), std::invalid_argument);
}

TEST_CASE("nominal controller") {
  CHECK(nominal_controller(Eigen::Vector2d(1, 1), Eigen::Vector2d(1, 1), 1.0, 0.1)
            .isZero(0.0));
  Eigen::VectorXd a = nominal_controller(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 0), 1.0, 0.1);
  CHECK(a(0) == doctest::Approx(-0.1));
  CHECK(a(1) == 0.0);
  Eigen::VectorXd b = nominal_controller(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0), 0.05, 0.1);
  CHECK(b(0) == 0.0);
  CHECK(b(1) == doctest::Approx(-0.05));
  Eigen::VectorXd c = nominal_controller(Eigen::Vector2d(3, 4), Eigen::Vector2d(0, 0), 1.0, 0.1);
  CHECK(c.norm() == doctest::Approx(0.1));
  CHECK(c(0) / c(1) == doctest::Approx(0.75));
  CHECK_THROWS_AS(nominal_controller(Eigen::Vector2d(0, 1), Eigen::Vector2d(0, 0), 0.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("unicycle inversion") {
  auto a = unicycle_map({0.1, 0.0}, 0.0, 0.1);
  CHECK(a.linear_speed == doctest::Approx(0.1));
  CHECK(a.angular_rate == doctest::Approx(0.0));
  auto b = unicycle_map({0.0, 0.1}, 0.0, 0.1);
  CHECK(b.linear_speed == doctest::Approx(0.0));
  CHECK(b.angular_rate == doctest::Approx(1.0));
  auto c = unicycle_map({0.0, 0.0}, 1.3, 0.1);
  CHECK(c.linear_speed == 0.0);
  CHECK(c.angular_rate == 0.0);
  CHECK_THROWS_AS(unicycle_map({0.1, 0.0}, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("wrap_angle keeps (-pi, pi]") {
  CHECK(wrap_angle(std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(-std::numbers::pi) == doctest::Approx(std::numbers::pi));
  CHECK(wrap_angle(3 * std::numbers::pi / 2) == doctest::Approx(-std::numbers::pi / 2));
  CHECK(wrap_angle(0.25) == doctest::Approx(0.25));
}

TEST_CASE("euler step arithmetic") {
  Rng rng(1);
  std::vector<RobotSpec> robots{integrator({0, 0})};
  WorldState s = single({0.5, -0.5});
  WorldState still = step_true_state(s, {Eigen::Vector2d::Zero()}, robots, {}, 0.1, rng);
  CHECK(still.true_positions[0] == s.true_positions[0]);
  WorldState moved = step_true_state(s, {Eigen::Vector2d(0.1, 0.0)}, robots, {}, 0.1, rng);
  CHECK(moved.true_positions[0](0) == doctest::Approx(0.51));
  CHECK(moved.true_positions[0](1) == doctest::Approx(-0.5));
  CHECK(moved.time == doctest::Approx(0.1));
  CHECK_THROWS_AS(step_true_state(s, {Eigen::Vector2d::Zero()}, robots, {}, 0.0, rng),
                  std::invalid_argument);
}

TEST_CASE("obstacles drift with their reported velocity") {
  Rng rng(1);
  ObstacleSpec o;
  o.reported_velocity = Eigen::Vector2d(-0.05, 0.0);
  o.meas_noise = Eigen::Vector2d::Zero();
  o.vel_noise = Eigen::Vector2d::Zero();
  WorldState s;
  s.obstacle_positions = {Eigen::Vector2d(1.0, 0.0)};
  WorldState n = step_true_state(s, {}, {}, {o}, 0.2, rng);
  CHECK(n.obstacle_positions[0](0) == doctest::Approx(0.99));
}

TEST_CASE("noise stays inside its supports") {
  Rng rng(5);
  std::vector<RobotSpec> robots{integrator({0, 0}, 0.1, 0.07)};
  const double dt = 0.1;
  WorldState s = single({0.0, 0.0});
  const Eigen::Vector2d u(0.03, -0.02);
  Eigen::Vector2d mean_err = Eigen::Vector2d::Zero();
  const int n = 100000;
  for (int k = 0; k < n; ++k) {
    Measurement m = measure(s, robots, {}, rng);
    Eigen::VectorXd err = m.robot_positions[0] - s.true_positions[0];
    CHECK(err.cwiseAbs().maxCoeff() <= 0.1);
    mean_err += err;
    WorldState next = step_true_state(s, {u}, robots, {}, dt, rng);
    Eigen::VectorXd dev = next.true_positions[0] - s.true_positions[0] - u * dt;
    CHECK(dev.cwiseAbs().maxCoeff() <= 0.07 * dt + 1e-15);
    s = next;
  }
  CHECK((mean_err / n).cwiseAbs().maxCoeff() <= 0.001);
}

TEST_CASE("noiseless measurement is exact") {
  Rng rng(2);
  std::vector<RobotSpec> robots{integrator({0, 0})};
  WorldState s = single({0.25, 0.75});
  CHECK(measure(s, robots, {}, rng).robot_positions[0] == s.true_positions[0]);
}

TEST_CASE("same seed gives the same trajectory") {
  std::vector<RobotSpec> robots{integrator({0, 0}, 0.05, 0.07),
                                integrator({1, 1}, 0.05, 0.07)};
  auto roll = [&](std::uint64_t seed) {
    Rng rng(seed);
    WorldState s;
    s.true_positions = {Eigen::Vector2d(0, 0), Eigen::Vector2d(2, 2)};
    s.headings = {0.0, 0.0};
    std::vector<Eigen::VectorXd> trace;
    for (int k = 0; k < 200; ++k) {
      Measurement m = measure(s, robots, {}, rng);
      trace.push_back(m.robot_positions[1]);
      s = step_true_state(s, {Eigen::Vector2d(0.05, 0.0), Eigen::Vector2d(-0.05, 0.0)},
                          robots, {}, 0.02, rng);
      trace.push_back(s.true_positions[0]);
    }
    return trace;
  };
  auto a = roll(9);
  auto b = roll(9);
  auto c = roll(10);
  REQUIRE(a.size() == b.size());
  bool same = true;
  bool differs = false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    same = same && (a[k].array() == b[k].array()).all();
    differs = differs || (a[k].array() != c[k].array()).any();
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("lookahead point tracks the desired velocity to first order") {
  RobotSpec r = integrator({0, 0});
  r.model_kind = ModelKind::unicycle_mapped;
  r.lookahead = 0.1;
  const Eigen::Vector2d desired(0.03, 0.08);
  auto error_at = [&](double dt) {
    Rng rng(1);
    WorldState s = single({0.0, 0.0});
    s.headings = {0.4};
    const Eigen::VectorXd p0 = filter_point(r, s.true_positions[0], s.headings[0]);
    WorldState n = step_true_state(s, {desired}, {r}, {}, dt, rng);
    const Eigen::VectorXd p1 = filter_point(r, n.true_positions[0], n.headings[0]);
    return ((p1 - p0) / dt - desired).norm();
  };
  const double e1 = error_at(0.02);
  const double e2 = error_at(0.01);
  CHECK(e1 > 0.0);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r.filter_radius() == doctest::Approx(r.radius + 0.1));
}

TEST_CASE("spec validation") {
  RobotSpec r = integrator({0, 0});
  CHECK_NOTHROW(r.validate());
  r.radius = 0.0;
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = integrator({0, 0});
  r.proc_noise = Eigen::Vector2d(-0.1, 0.0);
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
  r = integrator({0, 0});
  r.meas_noise = Eigen::Vector3d::Zero();
  CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

}
