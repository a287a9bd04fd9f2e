#include "prsbc/certificates.hpp"

#include <cmath>
#include <stdexcept>

namespace prsbc {

namespace {

double radius_factor(RadiusConvention convention, Eigen::Index dim) {
  return convention == RadiusConvention::paper_d_factor
             ? static_cast<double>(dim)
             : 1.0;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be > 0");
}

Eigen::VectorXd block_row(int num_robots, int control_dim) {
  return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_robots) *
                               control_dim);
}

}  // namespace

std::vector<DifferenceDistribution> difference_distributions(
    const Eigen::VectorXd& pos_i, const Eigen::VectorXd& noise_i,
    const Eigen::VectorXd& pos_j, const Eigen::VectorXd& noise_j) {
  if (pos_i.size() != pos_j.size() || noise_i.size() != pos_i.size() ||
      noise_j.size() != pos_j.size()) {
    throw std::invalid_argument("belief dimensions disagree");
  }
  std::vector<DifferenceDistribution> out;
  out.reserve(static_cast<std::size_t>(pos_i.size()));
  for (Eigen::Index l = 0; l < pos_i.size(); ++l) {
    out.push_back(DifferenceDistribution::from_uniforms(pos_i(l), noise_i(l),
                                                        pos_j(l), noise_j(l)));
  }
  return out;
}

double compute_B(const Eigen::VectorXd& proc_i, const Eigen::VectorXd& proc_j,
                 std::span<const DifferenceDistribution> dist_per_axis,
                 double gamma) {
  check_gamma(gamma);
  if (proc_i.size() != proc_j.size() ||
      static_cast<std::size_t>(proc_i.size()) != dist_per_axis.size()) {
    throw std::invalid_argument("process noise and axis count disagree");
  }
  double total = 0.0;
  for (std::size_t l = 0; l < dist_per_axis.size(); ++l) {
    const auto axis = static_cast<Eigen::Index>(l);
    const double max_dw = proc_i(axis) + proc_j(axis);
    total += -(2.0 / gamma) * max_dw * dist_per_axis[l].max_abs();
  }
  return total;
}

namespace {

Eigen::VectorXd select_offsets(std::span<const DifferenceDistribution> dists,
                               double sigma) {
  Eigen::VectorXd e(static_cast<Eigen::Index>(dists.size()));
  for (std::size_t l = 0; l < dists.size(); ++l) {
    e(static_cast<Eigen::Index>(l)) = select_offset(dists[l], sigma).selected;
  }
  return e;
}

}  // namespace

PairBelief make_pair_belief(const RobotBelief& robot_i,
                            const RobotBelief& robot_j, double sigma,
                            double gamma) {
  check_gamma(gamma);
  const auto dists =
      difference_distributions(robot_i.position, robot_i.meas_noise,
                               robot_j.position, robot_j.meas_noise);
  PairBelief belief;
  belief.e = select_offsets(dists, sigma);
  belief.B = compute_B(robot_i.proc_noise, robot_j.proc_noise, dists, gamma);
  belief.delta_drift = robot_i.model.drift - robot_j.model.drift;
  belief.input_i = robot_i.model.input_matrix;
  belief.input_j = robot_j.model.input_matrix;
  belief.combined_radius = robot_i.radius + robot_j.radius;
  belief.gamma = gamma;
  return belief;
}

PairBelief make_obstacle_belief(const RobotBelief& robot,
                                const ObstacleBelief& obstacle, double sigma,
                                double gamma) {
  check_gamma(gamma);
  const auto dists = difference_distributions(
      robot.position, robot.meas_noise, obstacle.position, obstacle.meas_noise);
  PairBelief belief;
  belief.e = select_offsets(dists, sigma);
  belief.B = compute_B(robot.proc_noise, obstacle.vel_noise, dists, gamma);
  belief.delta_drift = robot.model.drift;
  belief.input_i = robot.model.input_matrix;
  belief.combined_radius = robot.radius + obstacle.radius;
  belief.gamma = gamma;
  return belief;
}

HalfspaceConstraint pairwise_prsbc(const PairBelief& belief, int i, int j,
                                   int num_robots, int control_dim,
                                   RadiusConvention convention) {
  const double gamma = belief.gamma;
  const double r2 = belief.combined_radius * belief.combined_radius;
  HalfspaceConstraint row;
  row.coefficients = block_row(num_robots, control_dim);
  row.coefficients.segment(i * control_dim, control_dim) =
      (-2.0 / gamma) * (belief.input_i.transpose() * belief.e);
  row.coefficients.segment(j * control_dim, control_dim) =
      (2.0 / gamma) * (belief.input_j.transpose() * belief.e);
  row.bound = belief.e.squaredNorm() -
              radius_factor(convention, belief.e.size()) * r2 + belief.B +
              (2.0 / gamma) * belief.e.dot(belief.delta_drift);
  row.tag = {ConstraintTag::Kind::robot_pair, i, j};
  return row;
}

HalfspaceConstraint robot_obstacle_prsbc(
    int i, int k, const PairBelief& belief,
    const Eigen::VectorXd& reported_velocity, int num_robots, int control_dim,
    RadiusConvention convention) {
  const double gamma = belief.gamma;
  const double r2 = belief.combined_radius * belief.combined_radius;
  HalfspaceConstraint row;
  row.coefficients = block_row(num_robots, control_dim);
  row.coefficients.segment(i * control_dim, control_dim) =
      (-2.0 / gamma) * (belief.input_i.transpose() * belief.e);
  row.bound = (-2.0 / gamma) * belief.e.dot(reported_velocity) +
              belief.e.squaredNorm() -
              radius_factor(convention, belief.e.size()) * r2 + belief.B +
              (2.0 / gamma) * belief.e.dot(belief.delta_drift);
  row.tag = {ConstraintTag::Kind::robot_obstacle, i, k};
  return row;
}

SplitConstraint decentralized_split(const HalfspaceConstraint& constraint,
                                    double p_ij, double p_ji, int control_dim) {
  if (!(p_ij >= 0.0 && p_ij <= 1.0 && p_ji >= 0.0 && p_ji <= 1.0)) {
    throw std::domain_error("responsibility shares must lie in [0, 1]");
  }
  if (p_ij + p_ji <= 0.0) {
    throw std::domain_error("responsibility shares must not both be zero");
  }
  if (constraint.tag.kind != ConstraintTag::Kind::robot_pair) {
    throw std::invalid_argument("only robot-pair rows can be split");
  }
  const int i = constraint.tag.first;
  const int j = constraint.tag.second;
  const double total = p_ij + p_ji;
  SplitConstraint out;
  out.own.coefficients =
      constraint.coefficients.segment(i * control_dim, control_dim);
  out.own.bound = p_ij / total * constraint.bound;
  out.own.tag = constraint.tag;
  out.other.coefficients =
      constraint.coefficients.segment(j * control_dim, control_dim);
  out.other.bound = p_ji / total * constraint.bound;
  out.other.tag = {constraint.tag.kind, j, i};
  return out;
}

HalfspaceConstraint sbc_pairwise(const RobotBelief& robot_i,
                                 const RobotBelief& robot_j, int i, int j,
                                 int num_robots, int control_dim,
                                 double gamma) {
  check_gamma(gamma);
  const Eigen::VectorXd dx = robot_i.position - robot_j.position;
  const Eigen::VectorXd df = robot_i.model.drift - robot_j.model.drift;
  const double r = robot_i.radius + robot_j.radius;
  HalfspaceConstraint row;
  row.coefficients = block_row(num_robots, control_dim);
  row.coefficients.segment(i * control_dim, control_dim) =
      (-2.0 / gamma) * (robot_i.model.input_matrix.transpose() * dx);
  row.coefficients.segment(j * control_dim, control_dim) =
      (2.0 / gamma) * (robot_j.model.input_matrix.transpose() * dx);
  row.bound = dx.squaredNorm() - r * r + (2.0 / gamma) * dx.dot(df);
  row.tag = {ConstraintTag::Kind::robot_pair, i, j};
  return row;
}

HalfspaceConstraint sbc_robot_obstacle(const RobotBelief& robot,
                                       const ObstacleBelief& obstacle, int i,
                                       int k, int num_robots, int control_dim,
                                       double gamma) {
  check_gamma(gamma);
  const Eigen::VectorXd dx = robot.position - obstacle.position;
  const double r = robot.radius + obstacle.radius;
  HalfspaceConstraint row;
  row.coefficients = block_row(num_robots, control_dim);
  row.coefficients.segment(i * control_dim, control_dim) =
      (-2.0 / gamma) * (robot.model.input_matrix.transpose() * dx);
  row.bound = (-2.0 / gamma) * dx.dot(obstacle.reported_velocity) +
              dx.squaredNorm() - r * r +
              (2.0 / gamma) * dx.dot(robot.model.drift);
  row.tag = {ConstraintTag::Kind::robot_obstacle, i, k};
  return row;
}

namespace {

HalfspaceConstraint pair_row(const MeasuredWorld& world,
                             const CertificateConfig& config, int i, int j) {
  const int n = world.num_robots();
  const auto& ri = world.robots[static_cast<std::size_t>(i)];
  const auto& rj = world.robots[static_cast<std::size_t>(j)];
  if (config.mode == CertificateMode::sbc) {
    return sbc_pairwise(ri, rj, i, j, n, world.control_dim, config.gamma);
  }
  return pairwise_prsbc(make_pair_belief(ri, rj, config.sigma, config.gamma),
                        i, j, n, world.control_dim, config.convention);
}

HalfspaceConstraint obstacle_row(const MeasuredWorld& world,
                                 const CertificateConfig& config, int i,
                                 int k) {
  const int n = world.num_robots();
  const auto& robot = world.robots[static_cast<std::size_t>(i)];
  const auto& obstacle = world.obstacles[static_cast<std::size_t>(k)];
  if (config.mode == CertificateMode::sbc) {
    return sbc_robot_obstacle(robot, obstacle, i, k, n, world.control_dim,
                              config.gamma);
  }
  return robot_obstacle_prsbc(
      i, k, make_obstacle_belief(robot, obstacle, config.sigma_o, config.gamma),
      obstacle.reported_velocity, n, world.control_dim, config.convention);
}

double responsibility(const Topology& topology, int i, int j) {
  if (topology.responsibility.size() == 0) return 0.5;
  return topology.responsibility(i, j);
}

}  // namespace

ConstraintBundle build_all(const MeasuredWorld& world,
                           const CertificateConfig& config,
                           const Topology& topology) {
  const int n = world.num_robots();
  const int num_obstacles = static_cast<int>(world.obstacles.size());
  const int m = world.control_dim;
  if (topology.responsibility.size() != 0 &&
      (topology.responsibility.rows() != n ||
       topology.responsibility.cols() != n)) {
    throw std::invalid_argument("responsibility matrix must be N x N");
  }
  ConstraintBundle bundle;
  if (!topology.decentralized) {
    bundle.joint.reserve(static_cast<std::size_t>(n * (n - 1) / 2 +
                                                  n * num_obstacles));
    for (int i = 1; i < n; ++i) {
      for (int j = 0; j < i; ++j) bundle.joint.push_back(pair_row(world, config, i, j));
    }
    for (int i = 0; i < n; ++i) {
      for (int k = 0; k < num_obstacles; ++k) {
        bundle.joint.push_back(obstacle_row(world, config, i, k));
      }
    }
    return bundle;
  }

  bundle.per_robot.resize(static_cast<std::size_t>(n));
  for (int i = 1; i < n; ++i) {
    for (int j = 0; j < i; ++j) {
      if (config.neighbor_radius) {
        const double dist = (world.robots[static_cast<std::size_t>(i)].position -
                             world.robots[static_cast<std::size_t>(j)].position)
                                .norm();
        if (dist > *config.neighbor_radius) continue;
      }
      const HalfspaceConstraint row = pair_row(world, config, i, j);
      const SplitConstraint split = decentralized_split(
          row, responsibility(topology, i, j), responsibility(topology, j, i), m);
      bundle.per_robot[static_cast<std::size_t>(i)].push_back(split.own);
      bundle.per_robot[static_cast<std::size_t>(j)].push_back(split.other);
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < num_obstacles; ++k) {
      HalfspaceConstraint row = obstacle_row(world, config, i, k);
      row.coefficients = row.coefficients.segment(i * m, m).eval();
      bundle.per_robot[static_cast<std::size_t>(i)].push_back(std::move(row));
    }
  }
  return bundle;
}

}  // namespace prsbc
