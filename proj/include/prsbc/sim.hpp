#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prsbc/certificates.hpp"
#include "prsbc/dynamics.hpp"
#include "prsbc/qp.hpp"

namespace prsbc {

enum class ControllerKind { prsbc_centralized, prsbc_decentralized, sbc, none };
enum class SafetyMetricKind { monte_carlo, box_overlap };

const char* to_string(ControllerKind kind);

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Scenario {
  std::vector<RobotSpec> robots;
  std::vector<Eigen::VectorXd> robot_starts;
  std::vector<double> robot_headings;  // unicycles only; defaults to 0
  std::vector<ObstacleSpec> obstacles;
  std::vector<Eigen::VectorXd> obstacle_starts;

  double sigma = 0.9;
  double sigma_o = 0.9;
  double gamma = 100.0;
  double dt = 0.02;
  int max_steps = 4000;
  std::uint64_t seed = 0;
  ControllerKind controller = ControllerKind::prsbc_centralized;
  Eigen::MatrixXd responsibility;  // empty: 0.5 everywhere
  RadiusConvention convention = RadiusConvention::paper_d_factor;
  double gain = 1.0;
  double goal_tolerance = 0.05;
  std::optional<double> neighbor_radius;

  SafetyMetricKind safety_metric = SafetyMetricKind::monte_carlo;
  int safety_samples = 10000;
  int safety_every = 10;  // evaluate the probabilistic metric every k steps
  QPOptions qp;

  int dim() const;
  /// Throws ScenarioError, including when two entities could already overlap
  /// somewhere inside their measurement boxes at t = 0.
  void validate() const;
};

struct RobotStepRecord {
  Eigen::VectorXd true_position;
  Eigen::VectorXd measured_position;
  Eigen::VectorXd nominal_control;
  Eigen::VectorXd safe_control;
  SolveStatus status = SolveStatus::optimal;
};

struct StepRecord {
  int step = 0;
  double time = 0.0;
  std::vector<RobotStepRecord> robots;
  std::vector<double> pair_distances;  // (i, j) for i > j, row-major
};

struct TrajectoryLog {
  std::vector<StepRecord> steps;
};

struct Metrics {
  double min_true_pair_distance = 0.0;
  double min_true_obstacle_distance = 0.0;
  double min_empirical_pair_safety = 1.0;
  double min_empirical_obstacle_safety = 1.0;
  int collision_step_count = 0;
  std::vector<std::optional<double>> goal_reach_times;
  int fallback_count = 0;
  int solve_count = 0;
  double mean_solve_time_per_robot = 0.0;
  double median_solve_time_per_robot = 0.0;
  int steps = 0;
};

struct RunResult {
  TrajectoryLog log;
  Metrics metrics;
};

struct RunOptions {
  bool record_log = true;
};

/// Measure -> nominal control -> certificates -> QP -> actuate, until every
/// robot is within goal_tolerance or max_steps is reached.
RunResult run(const Scenario& scenario, const RunOptions& options = {});

/// Monte Carlo estimate of Pr(||x_i - x_j|| >= combined_radius) when each true
/// position is uniform in the box around its measurement.
double empirical_pair_safety(const Eigen::VectorXd& measured_i,
                             const Eigen::VectorXd& noise_i,
                             const Eigen::VectorXd& measured_j,
                             const Eigen::VectorXd& noise_j,
                             double combined_radius, int n_samples, Rng& rng);

/// Box-overlap alternative: boxes are the measurement boxes inflated by each
/// radius; returns the smaller of the two non-overlapping volume fractions.
double box_overlap_safety(const Eigen::VectorXd& measured_i,
                          const Eigen::VectorXd& noise_i, double radius_i,
                          const Eigen::VectorXd& measured_j,
                          const Eigen::VectorXd& noise_j, double radius_j);

/// A pair as seen by the filter at one step. For an obstacle, `robot_j`
/// carries its position belief, velocity noise in proc_noise, and
/// `other_velocity` is the reported obstacle velocity.
struct PairContext {
  RobotBelief robot_i;
  RobotBelief robot_j;
  double gamma = 100.0;
  std::optional<Eigen::VectorXd> other_velocity;
};

/// Frequency with which hdot + gamma h >= 0 holds when the true positions and
/// the process noise are drawn from their supports.
double verify_chance_constraint(const PairContext& context,
                                const Eigen::VectorXd& u_i,
                                const Eigen::VectorXd& u_j, int n_samples,
                                Rng& rng);

/// Per-step confidence giving a whole-trajectory level of sigma_all over
/// n_steps independent steps. Throws std::domain_error for sigma_all <= 0.
double stepwise_sigma(double sigma_all, int n_steps);

struct FieldStats {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct AggregateMetrics {
  std::vector<Metrics> trials;
  FieldStats min_true_pair_distance;
  FieldStats min_true_obstacle_distance;
  FieldStats min_empirical_pair_safety;
  FieldStats min_empirical_obstacle_safety;
  FieldStats collision_step_count;
  FieldStats fallback_count;
  FieldStats mean_solve_time_per_robot;
  FieldStats median_solve_time_per_robot;
  FieldStats steps;
  int trials_with_collision = 0;
};

/// Runs seeds base_seed .. base_seed + n_trials - 1. Parallel over
/// `threads` workers (0: PRSBC_THREADS or hardware concurrency).
AggregateMetrics monte_carlo_trials(const Scenario& scenario, int n_trials,
                                    std::uint64_t base_seed, int threads = 0);

AggregateMetrics aggregate(std::vector<Metrics> trials);

}  // namespace prsbc
