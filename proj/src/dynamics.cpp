#include "prsbc/dynamics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace prsbc {

namespace {

bool all_nonnegative(const Eigen::VectorXd& v) {
  return v.allFinite() && (v.array() >= 0.0).all();
}

}  // namespace

double RobotSpec::filter_radius() const {
  return model_kind == ModelKind::unicycle_mapped ? radius + lookahead : radius;
}

void RobotSpec::validate() const {
  const auto d = goal.size();
  if (d < 1) throw std::invalid_argument("robot goal must have dimension >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("robot radius must be > 0");
  if (!(ctrl_limit > 0.0)) {
    throw std::invalid_argument("robot ctrl_limit must be > 0");
  }
  if (meas_noise.size() != d || proc_noise.size() != d) {
    throw std::invalid_argument("robot noise vectors must match goal dimension");
  }
  if (!all_nonnegative(meas_noise) || !all_nonnegative(proc_noise)) {
    throw std::invalid_argument("noise half widths must be >= 0");
  }
  if (model_kind == ModelKind::unicycle_mapped) {
    if (d != 2) throw std::invalid_argument("unicycle robots are planar");
    if (!(lookahead > 0.0)) {
      throw std::invalid_argument("unicycle lookahead must be > 0");
    }
  }
}

void ObstacleSpec::validate() const {
  const auto d = reported_velocity.size();
  if (d < 1) throw std::invalid_argument("obstacle velocity dimension >= 1");
  if (!(radius > 0.0)) throw std::invalid_argument("obstacle radius must be > 0");
  if (meas_noise.size() != d || vel_noise.size() != d) {
    throw std::invalid_argument("obstacle noise vectors must match dimension");
  }
  if (!all_nonnegative(meas_noise) || !all_nonnegative(vel_noise)) {
    throw std::invalid_argument("noise half widths must be >= 0");
  }
}

AffineModel eval_affine(const RobotSpec& spec,
                        const Eigen::VectorXd& measured_pos,
                        std::optional<double> /*heading*/) {
  if (!measured_pos.allFinite()) {
    throw std::invalid_argument("measured position is not finite");
  }
  const auto d = measured_pos.size();
  switch (spec.model_kind) {
    case ModelKind::single_integrator:
    case ModelKind::unicycle_mapped:
      // The unicycle is exposed through its lookahead point, whose velocity
      // is directly commanded after inversion.
      return {Eigen::VectorXd::Zero(d), Eigen::MatrixXd::Identity(d, d)};
  }
  throw std::invalid_argument("unknown model kind");
}

Eigen::VectorXd nominal_controller(const Eigen::VectorXd& measured_pos,
                                   const Eigen::VectorXd& goal, double gain,
                                   double ctrl_limit) {
  if (!(gain > 0.0)) throw std::invalid_argument("controller gain must be > 0");
  Eigen::VectorXd u = -gain * (measured_pos - goal);
  const double norm = u.norm();
  if (norm > ctrl_limit) u *= ctrl_limit / norm;
  return u;
}

UnicycleCommand unicycle_map(const Eigen::Vector2d& desired_velocity,
                             double heading, double lookahead) {
  if (!(lookahead > 0.0)) throw std::invalid_argument("lookahead must be > 0");
  const double c = std::cos(heading);
  const double s = std::sin(heading);
  return {desired_velocity.x() * c + desired_velocity.y() * s,
          (-desired_velocity.x() * s + desired_velocity.y() * c) / lookahead};
}

Eigen::VectorXd filter_point(const RobotSpec& spec,
                             const Eigen::VectorXd& position, double heading) {
  if (spec.model_kind != ModelKind::unicycle_mapped) return position;
  Eigen::VectorXd p = position;
  p(0) += spec.lookahead * std::cos(heading);
  p(1) += spec.lookahead * std::sin(heading);
  return p;
}

double wrap_angle(double angle) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle + std::numbers::pi, two_pi);
  if (a < 0.0) a += two_pi;
  a -= std::numbers::pi;
  return a == -std::numbers::pi ? std::numbers::pi : a;
}

namespace {

Eigen::VectorXd sample_box(const Eigen::VectorXd& half_widths, Rng& rng) {
  Eigen::VectorXd out(half_widths.size());
  for (Eigen::Index l = 0; l < half_widths.size(); ++l) {
    out(l) = sample(SymmetricUniform{half_widths(l)}, rng);
  }
  return out;
}

}  // namespace

WorldState step_true_state(const WorldState& state,
                           const std::vector<Eigen::VectorXd>& controls,
                           const std::vector<RobotSpec>& robots,
                           const std::vector<ObstacleSpec>& obstacles,
                           double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (controls.size() != robots.size() ||
      state.true_positions.size() != robots.size() ||
      state.obstacle_positions.size() != obstacles.size()) {
    throw std::invalid_argument("state, controls and specs disagree in size");
  }
  WorldState next = state;
  next.time = state.time + dt;
  if (next.headings.size() != robots.size()) next.headings.resize(robots.size(), 0.0);

  for (std::size_t i = 0; i < robots.size(); ++i) {
    const RobotSpec& spec = robots[i];
    const Eigen::VectorXd w = sample_box(spec.proc_noise, rng);
    Eigen::VectorXd& x = next.true_positions[i];
    if (spec.model_kind == ModelKind::unicycle_mapped) {
      const double theta = state.headings.size() > i ? state.headings[i] : 0.0;
      const UnicycleCommand cmd =
          unicycle_map(controls[i].head<2>(), theta, spec.lookahead);
      x(0) += (cmd.linear_speed * std::cos(theta) + w(0)) * dt;
      x(1) += (cmd.linear_speed * std::sin(theta) + w(1)) * dt;
      next.headings[i] = wrap_angle(theta + cmd.angular_rate * dt);
    } else {
      const AffineModel model = eval_affine(spec, x);
      x += (model.drift + model.input_matrix * controls[i] + w) * dt;
    }
  }
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    const Eigen::VectorXd w = sample_box(obstacles[k].vel_noise, rng);
    next.obstacle_positions[k] += (obstacles[k].reported_velocity + w) * dt;
  }
  return next;
}

Measurement measure(const WorldState& state,
                    const std::vector<RobotSpec>& robots,
                    const std::vector<ObstacleSpec>& obstacles, Rng& rng) {
  Measurement out;
  out.robot_positions.reserve(robots.size());
  for (std::size_t i = 0; i < robots.size(); ++i) {
    out.robot_positions.push_back(state.true_positions[i] +
                                  sample_box(robots[i].meas_noise, rng));
  }
  for (std::size_t k = 0; k < obstacles.size(); ++k) {
    out.obstacle_positions.push_back(state.obstacle_positions[k] +
                                     sample_box(obstacles[k].meas_noise, rng));
    out.obstacle_velocities.push_back(obstacles[k].reported_velocity);
  }
  return out;
}

}  // namespace prsbc
