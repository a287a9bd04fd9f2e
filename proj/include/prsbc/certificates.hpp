#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "prsbc/distributions.hpp"
#include "prsbc/dynamics.hpp"

namespace prsbc {

/// How the combined radius enters a summed per-axis certificate.
///  - paper_d_factor: d * R^2, the sum of d per-axis conditions.
///  - sbc_compat: R^2, which collapses exactly onto the deterministic barrier
///    certificate when all noise is zero.
enum class RadiusConvention { paper_d_factor, sbc_compat };

enum class CertificateMode { prsbc, sbc };

/// What the filter knows about one robot at the current step.
struct RobotBelief {
  Eigen::VectorXd position;  // measured filter point
  Eigen::VectorXd meas_noise;
  Eigen::VectorXd proc_noise;
  double radius = 0.0;
  AffineModel model;
};

struct ObstacleBelief {
  Eigen::VectorXd position;           // measured
  Eigen::VectorXd reported_velocity;
  Eigen::VectorXd meas_noise;
  Eigen::VectorXd vel_noise;
  double radius = 0.0;
};

struct MeasuredWorld {
  std::vector<RobotBelief> robots;
  std::vector<ObstacleBelief> obstacles;
  int control_dim = 2;

  int num_robots() const { return static_cast<int>(robots.size()); }
};

/// Everything a pairwise certificate needs once the offsets are chosen.
struct PairBelief {
  Eigen::VectorXd e;            // selected per-axis offsets
  double B = 0.0;               // process-noise margin, <= 0
  Eigen::VectorXd delta_drift;  // F_i - F_j (F_i for obstacles)
  Eigen::MatrixXd input_i;
  Eigen::MatrixXd input_j;      // empty for obstacles
  double combined_radius = 0.0;
  double gamma = 100.0;
};

struct ConstraintTag {
  enum class Kind { robot_pair, robot_obstacle };
  Kind kind = Kind::robot_pair;
  int first = 0;   // robot i
  int second = 0;  // robot j, or obstacle k
};

/// coefficients . u <= bound
struct HalfspaceConstraint {
  Eigen::VectorXd coefficients;
  double bound = 0.0;
  ConstraintTag tag;
};

/// Per-axis distributions of (x_i - x_j) given both measurements.
std::vector<DifferenceDistribution> difference_distributions(
    const Eigen::VectorXd& pos_i, const Eigen::VectorXd& noise_i,
    const Eigen::VectorXd& pos_j, const Eigen::VectorXd& noise_j);

/// Worst-case contribution of the process noise to the barrier derivative,
/// summed over axes: -(2/gamma) (dw_i + dw_j) max|dx| per axis.
double compute_B(const Eigen::VectorXd& proc_i, const Eigen::VectorXd& proc_j,
                 std::span<const DifferenceDistribution> dist_per_axis,
                 double gamma);

PairBelief make_pair_belief(const RobotBelief& robot_i,
                            const RobotBelief& robot_j, double sigma,
                            double gamma);

/// Obstacle process noise enters B alongside the robot's.
PairBelief make_obstacle_belief(const RobotBelief& robot,
                                const ObstacleBelief& obstacle, double sigma,
                                double gamma);

HalfspaceConstraint pairwise_prsbc(const PairBelief& belief, int i, int j,
                                   int num_robots, int control_dim,
                                   RadiusConvention convention);

HalfspaceConstraint robot_obstacle_prsbc(
    int i, int k, const PairBelief& belief,
    const Eigen::VectorXd& reported_velocity, int num_robots, int control_dim,
    RadiusConvention convention);

struct SplitConstraint {
  HalfspaceConstraint own;    // over u_i only, length control_dim
  HalfspaceConstraint other;  // over u_j only
};

/// Splits a robot-pair row into one row per robot, sharing the bound in
/// proportion p_ij : p_ji. Throws std::domain_error when both shares are 0.
SplitConstraint decentralized_split(const HalfspaceConstraint& constraint,
                                    double p_ij, double p_ji, int control_dim);

/// Deterministic barrier certificate built straight from the measurements,
/// scaled by 1/gamma to share the row normalization of the PrSBC rows.
HalfspaceConstraint sbc_pairwise(const RobotBelief& robot_i,
                                 const RobotBelief& robot_j, int i, int j,
                                 int num_robots, int control_dim, double gamma);

HalfspaceConstraint sbc_robot_obstacle(const RobotBelief& robot,
                                       const ObstacleBelief& obstacle, int i,
                                       int k, int num_robots, int control_dim,
                                       double gamma);

struct CertificateConfig {
  double sigma = 0.9;
  double sigma_o = 0.9;
  double gamma = 100.0;
  CertificateMode mode = CertificateMode::prsbc;
  RadiusConvention convention = RadiusConvention::paper_d_factor;
  /// Decentralized neighbor cutoff on measured distance; all robots if unset.
  std::optional<double> neighbor_radius;
};

struct Topology {
  bool decentralized = false;
  /// responsibility(i, j) = p_ij. Empty means 0.5 everywhere.
  Eigen::MatrixXd responsibility;
};

struct ConstraintBundle {
  std::vector<HalfspaceConstraint> joint;                  // centralized
  std::vector<std::vector<HalfspaceConstraint>> per_robot; // decentralized
};

/// Centralized: N(N-1)/2 pair rows followed by N*K obstacle rows over the
/// joint control vector. Decentralized: each robot gets its share of every
/// pair row with a neighbor plus its obstacle rows, over its own control.
ConstraintBundle build_all(const MeasuredWorld& world,
                           const CertificateConfig& config,
                           const Topology& topology);

}  // namespace prsbc
