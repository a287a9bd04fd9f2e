#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "prsbc/oracles.hpp"

namespace prsbc::oracles {

PairScenario random_pair(const PairGeneratorOptions& options,
                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int d = options.dim;

  auto make_robot = [&] {
    RobotBelief r;
    r.radius = 0.1 + 0.2 * unit(gen);
    r.meas_noise.resize(d);
    r.proc_noise.resize(d);
    for (int l = 0; l < d; ++l) {
      r.meas_noise(l) = options.meas_noise_max * unit(gen);
      r.proc_noise(l) = options.proc_noise_max * unit(gen);
    }
    r.model.drift = Eigen::VectorXd::Zero(d);
    r.model.input_matrix = Eigen::MatrixXd::Identity(d, d);
    return r;
  };

  PairScenario s;
  s.robot_i = make_robot();
  s.robot_j = make_robot();
  s.sigma = options.sigma;
  s.gamma = options.gamma_min +
            (options.gamma_max - options.gamma_min) * unit(gen);

  Eigen::VectorXd dir(d);
  for (int l = 0; l < d; ++l) dir(l) = normal(gen);
  dir.normalize();
  // Any two points of the measurement boxes are at least R_ij apart.
  const double spread = (s.robot_i.meas_noise + s.robot_j.meas_noise).norm();
  const double dist =
      s.robot_i.radius + s.robot_j.radius + spread + 0.3 * unit(gen);
  s.robot_i.position = Eigen::VectorXd::Zero(d);
  s.robot_j.position = dist * dir;

  const double speed = 0.5 * unit(gen);
  s.nominal_i.resize(d);
  s.nominal_j.resize(d);
  for (int l = 0; l < d; ++l) {
    s.nominal_i(l) = speed * dir(l) + 0.05 * normal(gen);
    s.nominal_j(l) = -speed * dir(l) + 0.05 * normal(gen);
  }
  return s;
}

double barrier_frequency(const PairScenario& pair, const Eigen::VectorXd& u_i,
                         const Eigen::VectorXd& u_j, int n_samples,
                         std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> sym(-1.0, 1.0);
  const auto& a = pair.robot_i;
  const auto& b = pair.robot_j;
  const Eigen::Index d = a.position.size();
  const double r = a.radius + b.radius;

  long hits = 0;
  for (int s = 0; s < n_samples; ++s) {
    double h = -r * r;
    double hdot = 0.0;
    for (Eigen::Index l = 0; l < d; ++l) {
      double xi = a.position(l) + a.meas_noise(l) * sym(gen);
      double xj = b.position(l) + b.meas_noise(l) * sym(gen);
      double wi = a.proc_noise(l) * sym(gen);
      double wj = b.proc_noise(l) * sym(gen);
      double dx = xi - xj;
      double vi = (a.model.input_matrix.row(l) * u_i)(0) + a.model.drift(l);
      double vj = (b.model.input_matrix.row(l) * u_j)(0) + b.model.drift(l);
      h += dx * dx;
      hdot += 2.0 * dx * (vi + wi - vj - wj);
    }
    if (hdot + pair.gamma * h >= 0.0) ++hits;
  }
  return static_cast<double>(hits) / n_samples;
}

double sufficiency_floor(double sigma, int n_samples) {
  double se = std::sqrt(sigma * (1.0 - sigma) / n_samples);
  return sigma - std::max(0.01, 3.0 * se);
}

SufficiencyOutcome run_sufficiency(const SufficiencyOptions& options) {
  SufficiencyOutcome out;
  const int d = options.pairs.dim;
  const double floor = sufficiency_floor(options.pairs.sigma, options.n_samples);
  std::mt19937_64 seeds(options.seed);
  for (int c = 0; c < options.n_cases; ++c) {
    const std::uint64_t case_seed = seeds();
    const std::uint64_t sample_seed = seeds();
    PairScenario pair = random_pair(options.pairs, case_seed);
    ++out.cases;

    PairBelief belief = make_pair_belief(pair.robot_i, pair.robot_j,
                                         pair.sigma, pair.gamma);
    belief.B *= options.b_sign;

    QPProblem qp;
    qp.reference.resize(2 * d);
    qp.reference << pair.nominal_i, pair.nominal_j;
    qp.rows.push_back(
        pairwise_prsbc(belief, 0, 1, 2, d, options.convention));
    // Wide box: the claim concerns any u on the row, not actuator limits.
    qp.lower = Eigen::VectorXd::Constant(2 * d, -100.0);
    qp.upper = Eigen::VectorXd::Constant(2 * d, 100.0);
    QPSolution sol = solve(qp);
    if (sol.status != SolveStatus::optimal) {
      ++out.failures;
      out.frequencies.push_back(0.0);
      out.worst_margin = std::min(out.worst_margin, -pair.sigma);
      out.worst_frequency = 0.0;
      continue;
    }
    ++out.solved;
    double freq = barrier_frequency(pair, sol.u.head(d), sol.u.tail(d),
                                    options.n_samples, sample_seed);
    out.frequencies.push_back(freq);
    out.worst_margin = std::min(out.worst_margin, freq - pair.sigma);
    out.worst_frequency = std::min(out.worst_frequency, freq);
    if (freq < floor) ++out.failures;
  }
  return out;
}

std::vector<RobotBelief> random_clear_team(int n_robots, double margin,
                                           const PairGeneratorOptions& options,
                                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = options.dim;
  std::vector<RobotBelief> team;
  int attempts = 0;
  while (static_cast<int>(team.size()) < n_robots) {
    if (++attempts > 100000) throw std::runtime_error("cannot place team");
    RobotBelief r;
    r.radius = 0.1 + 0.2 * unit(gen);
    r.position.resize(d);
    r.meas_noise.resize(d);
    r.proc_noise.resize(d);
    for (int l = 0; l < d; ++l) {
      r.position(l) = -2.0 + 4.0 * unit(gen);
      r.meas_noise(l) = options.meas_noise_max * unit(gen);
      r.proc_noise(l) = options.proc_noise_max * unit(gen);
    }
    r.model.drift = Eigen::VectorXd::Zero(d);
    r.model.input_matrix = Eigen::MatrixXd::Identity(d, d);
    bool clear = true;
    for (const auto& o : team) {
      // Closest approach of the two boxes.
      Eigen::VectorXd gap = ((r.position - o.position).cwiseAbs() -
                             r.meas_noise - o.meas_noise)
                                .cwiseMax(0.0);
      if (gap.norm() < std::sqrt(static_cast<double>(d)) *
                               (r.radius + o.radius) + margin) {
        clear = false;
        break;
      }
    }
    if (clear) team.push_back(std::move(r));
  }
  return team;
}

}  // namespace prsbc::oracles
