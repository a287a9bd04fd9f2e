#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "prsbc/distributions.hpp"

namespace prsbc {

enum class ModelKind { single_integrator, unicycle_mapped };

struct RobotSpec {
  int id = 0;
  double radius = 0.2;
  double ctrl_limit = 0.1;
  Eigen::VectorXd meas_noise;  // per-axis half widths
  Eigen::VectorXd proc_noise;  // per-axis half widths, m/s
  ModelKind model_kind = ModelKind::single_integrator;
  Eigen::VectorXd goal;
  double lookahead = 0.05;  // unicycle only

  int dim() const { return static_cast<int>(goal.size()); }
  /// Radius the safety filter sees. Unicycles are filtered at their lookahead
  /// point, so their footprint grows by the lookahead distance.
  double filter_radius() const;
  /// Throws std::invalid_argument when a field violates its contract.
  void validate() const;
};

struct ObstacleSpec {
  int id = 0;
  double radius = 0.2;
  Eigen::VectorXd reported_velocity;
  Eigen::VectorXd meas_noise;
  Eigen::VectorXd vel_noise;

  int dim() const { return static_cast<int>(reported_velocity.size()); }
  void validate() const;
};

struct WorldState {
  double time = 0.0;
  std::vector<Eigen::VectorXd> true_positions;
  std::vector<double> headings;  // one per robot; ignored for integrators
  std::vector<Eigen::VectorXd> obstacle_positions;
};

/// Control-affine model x' = drift + input_matrix * u, evaluated at a point.
struct AffineModel {
  Eigen::VectorXd drift;
  Eigen::MatrixXd input_matrix;
};

struct Measurement {
  std::vector<Eigen::VectorXd> robot_positions;
  std::vector<Eigen::VectorXd> obstacle_positions;
  std::vector<Eigen::VectorXd> obstacle_velocities;
};

AffineModel eval_affine(const RobotSpec& spec,
                        const Eigen::VectorXd& measured_pos,
                        std::optional<double> heading = std::nullopt);

/// Proportional go-to-goal law, norm-clamped to ctrl_limit.
Eigen::VectorXd nominal_controller(const Eigen::VectorXd& measured_pos,
                                   const Eigen::VectorXd& goal, double gain,
                                   double ctrl_limit);

struct UnicycleCommand {
  double linear_speed = 0.0;
  double angular_rate = 0.0;
};

/// Inverts the lookahead-point kinematics so that the point at distance
/// `lookahead` ahead of the wheel axle moves with `desired_velocity`.
UnicycleCommand unicycle_map(const Eigen::Vector2d& desired_velocity,
                             double heading, double lookahead);

/// Point the safety filter controls: the robot center for integrators, the
/// lookahead point for unicycles.
Eigen::VectorXd filter_point(const RobotSpec& spec,
                             const Eigen::VectorXd& position, double heading);

/// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

/// Explicit Euler step. Process noise is drawn once per entity per call and
/// held over dt; controls are filter-point velocities.
WorldState step_true_state(const WorldState& state,
                           const std::vector<Eigen::VectorXd>& controls,
                           const std::vector<RobotSpec>& robots,
                           const std::vector<ObstacleSpec>& obstacles,
                           double dt, Rng& rng);

/// Noisy position readings; obstacle velocities are reported as specified.
Measurement measure(const WorldState& state,
                    const std::vector<RobotSpec>& robots,
                    const std::vector<ObstacleSpec>& obstacles, Rng& rng);

}  // namespace prsbc
