#include "prsbc/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <thread>

#include "prsbc/kernels.hpp"

namespace prsbc {

const char* to_string(ControllerKind kind) {
  switch (kind) {
    case ControllerKind::prsbc_centralized:
      return "prsbc";
    case ControllerKind::prsbc_decentralized:
      return "prsbc-dec";
    case ControllerKind::sbc:
      return "sbc";
    case ControllerKind::none:
      return "none";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Smallest ||d|| over d in (center +/- half_widths), per-axis separable.
double box_min_distance(const Eigen::VectorXd& center,
                        const Eigen::VectorXd& half_widths) {
  return (center.cwiseAbs() - half_widths).cwiseMax(0.0).norm();
}

double box_max_distance(const Eigen::VectorXd& center,
                        const Eigen::VectorXd& half_widths) {
  return (center.cwiseAbs() + half_widths).norm();
}

double heading_of(const Scenario& s, std::size_t i) {
  return i < s.robot_headings.size() ? s.robot_headings[i] : 0.0;
}

}  // namespace

int Scenario::dim() const {
  return robots.empty() ? 0 : robots.front().dim();
}

void Scenario::validate() const {
  if (robots.empty()) throw ScenarioError("scenario has no robots");
  if (robot_starts.size() != robots.size()) {
    throw ScenarioError("every robot needs a start position");
  }
  if (!robot_headings.empty() && robot_headings.size() != robots.size()) {
    throw ScenarioError("headings must be given for all robots or none");
  }
  if (obstacle_starts.size() != obstacles.size()) {
    throw ScenarioError("every obstacle needs a start position");
  }
  const int d = dim();
  try {
    for (const auto& r : robots) {
      r.validate();
      if (r.dim() != d) throw ScenarioError("robot dimensions disagree");
    }
    for (const auto& o : obstacles) {
      o.validate();
      if (o.dim() != d) throw ScenarioError("obstacle dimension disagrees");
    }
  } catch (const std::invalid_argument& e) {
    throw ScenarioError(e.what());
  }
  for (const auto& p : robot_starts) {
    if (p.size() != d || !p.allFinite()) throw ScenarioError("bad robot start");
  }
  for (const auto& p : obstacle_starts) {
    if (p.size() != d || !p.allFinite()) throw ScenarioError("bad obstacle start");
  }
  if (!(sigma >= 0.5 && sigma <= 1.0) || !(sigma_o >= 0.5 && sigma_o <= 1.0)) {
    throw ScenarioError("sigma and sigma_o must lie in [0.5, 1]");
  }
  if (!(gamma > 0.0)) throw ScenarioError("gamma must be > 0");
  if (!(dt > 0.0)) throw ScenarioError("dt must be > 0");
  if (max_steps < 1) throw ScenarioError("max_steps must be >= 1");
  if (!(gain > 0.0)) throw ScenarioError("gain must be > 0");
  if (!(goal_tolerance >= 0.0)) throw ScenarioError("goal_tolerance must be >= 0");
  if (safety_samples < 1 || safety_every < 1) {
    throw ScenarioError("safety metric sampling parameters must be >= 1");
  }
  if (neighbor_radius && !(*neighbor_radius > 0.0)) {
    throw ScenarioError("neighbor_radius must be > 0");
  }
  const auto n = static_cast<Eigen::Index>(robots.size());
  if (responsibility.size() != 0) {
    if (responsibility.rows() != n || responsibility.cols() != n) {
      throw ScenarioError("responsibility matrix must be N x N");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        const double p = responsibility(i, j);
        if (!(p >= 0.0 && p <= 1.0)) {
          throw ScenarioError("responsibility entries must lie in [0, 1]");
        }
        if (i != j && responsibility(i, j) + responsibility(j, i) <= 0.0) {
          throw ScenarioError("responsibility shares of a pair sum to zero");
        }
      }
    }
  }

  // Collision-free over the full measurement supports at t = 0.
  for (std::size_t i = 0; i < robots.size(); ++i) {
    const Eigen::VectorXd pi =
        filter_point(robots[i], robot_starts[i], heading_of(*this, i));
    for (std::size_t j = 0; j < i; ++j) {
      const Eigen::VectorXd pj =
          filter_point(robots[j], robot_starts[j], heading_of(*this, j));
      const double gap = box_min_distance(
          pi - pj, robots[i].meas_noise + robots[j].meas_noise);
      if (gap < robots[i].filter_radius() + robots[j].filter_radius()) {
        throw ScenarioError("robots " + std::to_string(robots[i].id) + " and " +
                            std::to_string(robots[j].id) +
                            " are not initially collision-free over their "
                            "measurement supports");
      }
    }
    for (std::size_t k = 0; k < obstacles.size(); ++k) {
      const double gap = box_min_distance(
          pi - obstacle_starts[k], robots[i].meas_noise + obstacles[k].meas_noise);
      if (gap < robots[i].filter_radius() + obstacles[k].radius) {
        throw ScenarioError("robot " + std::to_string(robots[i].id) +
                            " and obstacle " + std::to_string(obstacles[k].id) +
                            " are not initially collision-free over their "
                            "measurement supports");
      }
    }
  }
}

namespace {

constexpr std::size_t kChunk = 4096;

void fill_difference(std::vector<double>& out, double center, double hw_i,
                     double hw_j, std::size_t count, Rng& rng) {
  for (std::size_t k = 0; k < count; ++k) {
    const double a = (2.0 * unit_uniform(rng) - 1.0) * hw_i;
    const double b = (2.0 * unit_uniform(rng) - 1.0) * hw_j;
    out[k] = center + a - b;
  }
}

}  // namespace

double empirical_pair_safety(const Eigen::VectorXd& measured_i,
                             const Eigen::VectorXd& noise_i,
                             const Eigen::VectorXd& measured_j,
                             const Eigen::VectorXd& noise_j,
                             double combined_radius, int n_samples, Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const Eigen::VectorXd center = measured_i - measured_j;
  const Eigen::VectorXd spread = noise_i + noise_j;
  if (box_min_distance(center, spread) >= combined_radius) return 1.0;
  if (box_max_distance(center, spread) < combined_radius) return 0.0;

  const auto d = static_cast<std::size_t>(center.size());
  std::vector<std::vector<double>> axes(d, std::vector<double>(kChunk));
  std::vector<const double*> ptrs(d);
  for (std::size_t l = 0; l < d; ++l) ptrs[l] = axes[l].data();
  const double r2 = combined_radius * combined_radius;

  std::size_t hits = 0;
  auto remaining = static_cast<std::size_t>(n_samples);
  while (remaining > 0) {
    const std::size_t count = std::min(remaining, kChunk);
    for (std::size_t l = 0; l < d; ++l) {
      const auto ax = static_cast<Eigen::Index>(l);
      fill_difference(axes[l], center(ax), noise_i(ax), noise_j(ax), count, rng);
    }
    hits += kernels::count_outside_radius(ptrs, count, r2);
    remaining -= count;
  }
  return static_cast<double>(hits) / n_samples;
}

double box_overlap_safety(const Eigen::VectorXd& measured_i,
                          const Eigen::VectorXd& noise_i, double radius_i,
                          const Eigen::VectorXd& measured_j,
                          const Eigen::VectorXd& noise_j, double radius_j) {
  const Eigen::ArrayXd hi = noise_i.array() + radius_i;
  const Eigen::ArrayXd hj = noise_j.array() + radius_j;
  const Eigen::ArrayXd lo_i = measured_i.array() - hi;
  const Eigen::ArrayXd up_i = measured_i.array() + hi;
  const Eigen::ArrayXd lo_j = measured_j.array() - hj;
  const Eigen::ArrayXd up_j = measured_j.array() + hj;
  const Eigen::ArrayXd overlap =
      (up_i.min(up_j) - lo_i.max(lo_j)).max(0.0);
  const double inter = overlap.prod();
  const double vol_i = (2.0 * hi).prod();
  const double vol_j = (2.0 * hj).prod();
  return std::min(1.0 - inter / vol_i, 1.0 - inter / vol_j);
}

double verify_chance_constraint(const PairContext& context,
                                const Eigen::VectorXd& u_i,
                                const Eigen::VectorXd& u_j, int n_samples,
                                Rng& rng) {
  if (n_samples < 1) throw std::invalid_argument("n_samples must be >= 1");
  const RobotBelief& ri = context.robot_i;
  const RobotBelief& rj = context.robot_j;
  Eigen::VectorXd velocity = ri.model.input_matrix * u_i + ri.model.drift;
  if (context.other_velocity) {
    velocity -= *context.other_velocity;
  } else {
    velocity -= rj.model.input_matrix * u_j + rj.model.drift;
  }
  const Eigen::VectorXd center = ri.position - rj.position;
  const auto d = static_cast<std::size_t>(center.size());
  const double r = ri.radius + rj.radius;

  std::vector<std::vector<double>> dx(d, std::vector<double>(kChunk));
  std::vector<std::vector<double>> dw(d, std::vector<double>(kChunk));
  std::vector<const double*> dx_ptr(d);
  std::vector<const double*> dw_ptr(d);
  for (std::size_t l = 0; l < d; ++l) {
    dx_ptr[l] = dx[l].data();
    dw_ptr[l] = dw[l].data();
  }
  const std::vector<double> vel(velocity.data(), velocity.data() + velocity.size());

  std::size_t hits = 0;
  auto remaining = static_cast<std::size_t>(n_samples);
  while (remaining > 0) {
    const std::size_t count = std::min(remaining, kChunk);
    for (std::size_t l = 0; l < d; ++l) {
      const auto ax = static_cast<Eigen::Index>(l);
      fill_difference(dx[l], center(ax), ri.meas_noise(ax), rj.meas_noise(ax),
                      count, rng);
      fill_difference(dw[l], 0.0, ri.proc_noise(ax), rj.proc_noise(ax), count,
                      rng);
    }
    hits += kernels::count_barrier_satisfied(dx_ptr, dw_ptr, vel,
                                             2.0 / context.gamma, r * r, count);
    remaining -= count;
  }
  return static_cast<double>(hits) / n_samples;
}

double stepwise_sigma(double sigma_all, int n_steps) {
  if (!(sigma_all > 0.0 && sigma_all <= 1.0)) {
    throw std::domain_error("sigma_all must lie in (0, 1]");
  }
  if (n_steps < 1) throw std::domain_error("n_steps must be >= 1");
  return std::exp(std::log(sigma_all) / n_steps);
}

namespace {

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (values.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

struct StepGeometry {
  std::vector<double> pair_distances;
  double min_pair = kInf;
  double min_obstacle = kInf;
  bool collision = false;
};

StepGeometry measure_geometry(const Scenario& s, const WorldState& state) {
  StepGeometry g;
  const std::size_t n = s.robots.size();
  g.pair_distances.reserve(n * (n - 1) / 2);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double dist =
          (state.true_positions[i] - state.true_positions[j]).norm();
      g.pair_distances.push_back(dist);
      g.min_pair = std::min(g.min_pair, dist);
      if (dist < s.robots[i].radius + s.robots[j].radius) g.collision = true;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
      const double dist =
          (state.true_positions[i] - state.obstacle_positions[k]).norm();
      g.min_obstacle = std::min(g.min_obstacle, dist);
      if (dist < s.robots[i].radius + s.obstacles[k].radius) g.collision = true;
    }
  }
  return g;
}

MeasuredWorld filter_view(const Scenario& s, const WorldState& state,
                          const Measurement& meas) {
  MeasuredWorld world;
  world.control_dim = s.dim();
  world.robots.reserve(s.robots.size());
  for (std::size_t i = 0; i < s.robots.size(); ++i) {
    const RobotSpec& spec = s.robots[i];
    RobotBelief b;
    b.position = filter_point(spec, meas.robot_positions[i], state.headings[i]);
    b.meas_noise = spec.meas_noise;
    b.proc_noise = spec.proc_noise;
    b.radius = spec.filter_radius();
    b.model = eval_affine(spec, b.position, state.headings[i]);
    world.robots.push_back(std::move(b));
  }
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    const ObstacleSpec& spec = s.obstacles[k];
    world.obstacles.push_back({meas.obstacle_positions[k],
                               meas.obstacle_velocities[k], spec.meas_noise,
                               spec.vel_noise, spec.radius});
  }
  return world;
}

QPProblem make_problem(const Eigen::VectorXd& reference,
                       std::vector<HalfspaceConstraint> rows,
                       const std::vector<double>& limits, int control_dim) {
  QPProblem problem;
  problem.reference = reference;
  problem.rows = std::move(rows);
  set_inscribed_box(problem, limits, control_dim);
  return problem;
}

Rng metric_rng_for(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x5afe5afeU};
  return Rng(seq);
}

}  // namespace

RunResult run(const Scenario& s, const RunOptions& options) {
  s.validate();
  const std::size_t n = s.robots.size();
  const int m = s.dim();
  Rng rng(s.seed);
  Rng metric_rng = metric_rng_for(s.seed);

  WorldState state;
  state.true_positions = s.robot_starts;
  state.headings.resize(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) state.headings[i] = heading_of(s, i);
  state.obstacle_positions = s.obstacle_starts;

  CertificateConfig cert;
  cert.sigma = s.sigma;
  cert.sigma_o = s.sigma_o;
  cert.gamma = s.gamma;
  cert.mode = s.controller == ControllerKind::sbc ? CertificateMode::sbc
                                                  : CertificateMode::prsbc;
  cert.convention = s.convention;
  cert.neighbor_radius = s.neighbor_radius;
  Topology topology;
  topology.decentralized = s.controller == ControllerKind::prsbc_decentralized;
  topology.responsibility = s.responsibility;

  std::vector<double> limits(n);
  for (std::size_t i = 0; i < n; ++i) limits[i] = s.robots[i].ctrl_limit;

  RunResult result;
  Metrics& metrics = result.metrics;
  metrics.min_true_pair_distance = kInf;
  metrics.min_true_obstacle_distance = kInf;
  metrics.goal_reach_times.assign(n, std::nullopt);
  std::vector<double> solve_times;

  const auto update_geometry = [&](const WorldState& st) {
    StepGeometry g = measure_geometry(s, st);
    metrics.min_true_pair_distance = std::min(metrics.min_true_pair_distance, g.min_pair);
    metrics.min_true_obstacle_distance =
        std::min(metrics.min_true_obstacle_distance, g.min_obstacle);
    if (g.collision) ++metrics.collision_step_count;
    bool all_done = true;
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::VectorXd p =
          filter_point(s.robots[i], st.true_positions[i], st.headings[i]);
      const bool at_goal = (p - s.robots[i].goal).norm() <= s.goal_tolerance;
      if (at_goal && !metrics.goal_reach_times[i]) {
        metrics.goal_reach_times[i] = st.time;
      }
      all_done = all_done && at_goal;
    }
    return std::pair{std::move(g), all_done};
  };

  int step = 0;
  for (; step < s.max_steps; ++step) {
    auto [geometry, all_done] = update_geometry(state);
    if (all_done) break;

    const Measurement meas = measure(state, s.robots, s.obstacles, rng);
    const MeasuredWorld world = filter_view(s, state, meas);

    Eigen::VectorXd nominal(static_cast<Eigen::Index>(n) * m);
    for (std::size_t i = 0; i < n; ++i) {
      nominal.segment(static_cast<Eigen::Index>(i) * m, m) = nominal_controller(
          world.robots[i].position, s.robots[i].goal, s.gain,
          s.robots[i].ctrl_limit);
    }

    Eigen::VectorXd safe = nominal;
    std::vector<SolveStatus> status(n, SolveStatus::optimal);
    if (s.controller != ControllerKind::none) {
      const ConstraintBundle bundle = build_all(world, cert, topology);
      if (!topology.decentralized) {
        const QPSolution sol =
            solve(make_problem(nominal, bundle.joint, limits, m), s.qp);
        safe = sol.u;
        std::fill(status.begin(), status.end(), sol.status);
        ++metrics.solve_count;
        if (sol.status != SolveStatus::optimal) ++metrics.fallback_count;
        solve_times.push_back(sol.solve_time / static_cast<double>(n));
      } else {
        for (std::size_t i = 0; i < n; ++i) {
          const auto seg = static_cast<Eigen::Index>(i) * m;
          const QPSolution sol =
              solve(make_problem(nominal.segment(seg, m), bundle.per_robot[i],
                                 {limits[i]}, m),
                    s.qp);
          safe.segment(seg, m) = sol.u;
          status[i] = sol.status;
          ++metrics.solve_count;
          if (sol.status != SolveStatus::optimal) ++metrics.fallback_count;
          solve_times.push_back(sol.solve_time);
        }
      }
    }

    if (step % s.safety_every == 0) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          const double r = s.robots[i].radius + s.robots[j].radius;
          const double p =
              s.safety_metric == SafetyMetricKind::monte_carlo
                  ? empirical_pair_safety(meas.robot_positions[i],
                                          s.robots[i].meas_noise,
                                          meas.robot_positions[j],
                                          s.robots[j].meas_noise, r,
                                          s.safety_samples, metric_rng)
                  : box_overlap_safety(meas.robot_positions[i],
                                       s.robots[i].meas_noise,
                                       s.robots[i].radius,
                                       meas.robot_positions[j],
                                       s.robots[j].meas_noise,
                                       s.robots[j].radius);
          metrics.min_empirical_pair_safety =
              std::min(metrics.min_empirical_pair_safety, p);
        }
        for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
          const double r = s.robots[i].radius + s.obstacles[k].radius;
          const double p =
              s.safety_metric == SafetyMetricKind::monte_carlo
                  ? empirical_pair_safety(meas.robot_positions[i],
                                          s.robots[i].meas_noise,
                                          meas.obstacle_positions[k],
                                          s.obstacles[k].meas_noise, r,
                                          s.safety_samples, metric_rng)
                  : box_overlap_safety(meas.robot_positions[i],
                                       s.robots[i].meas_noise,
                                       s.robots[i].radius,
                                       meas.obstacle_positions[k],
                                       s.obstacles[k].meas_noise,
                                       s.obstacles[k].radius);
          metrics.min_empirical_obstacle_safety =
              std::min(metrics.min_empirical_obstacle_safety, p);
        }
      }
    }

    if (options.record_log) {
      StepRecord rec;
      rec.step = step;
      rec.time = state.time;
      rec.pair_distances = std::move(geometry.pair_distances);
      rec.robots.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        const auto seg = static_cast<Eigen::Index>(i) * m;
        rec.robots.push_back({state.true_positions[i], meas.robot_positions[i],
                              nominal.segment(seg, m), safe.segment(seg, m),
                              status[i]});
      }
      result.log.steps.push_back(std::move(rec));
    }

    std::vector<Eigen::VectorXd> controls(n);
    for (std::size_t i = 0; i < n; ++i) {
      controls[i] = safe.segment(static_cast<Eigen::Index>(i) * m, m);
    }
    state = step_true_state(state, controls, s.robots, s.obstacles, s.dt, rng);
  }
  if (step == s.max_steps) update_geometry(state);

  metrics.steps = step;
  if (!solve_times.empty()) {
    metrics.mean_solve_time_per_robot =
        std::accumulate(solve_times.begin(), solve_times.end(), 0.0) /
        static_cast<double>(solve_times.size());
    metrics.median_solve_time_per_robot = median(std::move(solve_times));
  }
  return result;
}

namespace {

FieldStats stats_of(const std::vector<Metrics>& trials,
                    double (*field)(const Metrics&)) {
  FieldStats st;
  st.min = kInf;
  st.max = -kInf;
  double sum = 0.0;
  for (const auto& t : trials) {
    const double v = field(t);
    st.min = std::min(st.min, v);
    st.max = std::max(st.max, v);
    sum += v;
  }
  st.mean = trials.empty() ? 0.0 : sum / static_cast<double>(trials.size());
  return st;
}

int resolve_threads(int requested, int n_trials) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("PRSBC_THREADS")) threads = std::atoi(env);
  }
  if (threads <= 0) {
    threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  return std::clamp(threads, 1, std::max(1, n_trials));
}

}  // namespace

AggregateMetrics aggregate(std::vector<Metrics> trials) {
  AggregateMetrics agg;
  agg.min_true_pair_distance =
      stats_of(trials, [](const Metrics& m) { return m.min_true_pair_distance; });
  agg.min_true_obstacle_distance = stats_of(
      trials, [](const Metrics& m) { return m.min_true_obstacle_distance; });
  agg.min_empirical_pair_safety = stats_of(
      trials, [](const Metrics& m) { return m.min_empirical_pair_safety; });
  agg.min_empirical_obstacle_safety = stats_of(
      trials, [](const Metrics& m) { return m.min_empirical_obstacle_safety; });
  agg.collision_step_count = stats_of(trials, [](const Metrics& m) {
    return static_cast<double>(m.collision_step_count);
  });
  agg.fallback_count = stats_of(trials, [](const Metrics& m) {
    return static_cast<double>(m.fallback_count);
  });
  agg.mean_solve_time_per_robot = stats_of(
      trials, [](const Metrics& m) { return m.mean_solve_time_per_robot; });
  agg.median_solve_time_per_robot = stats_of(
      trials, [](const Metrics& m) { return m.median_solve_time_per_robot; });
  agg.steps = stats_of(
      trials, [](const Metrics& m) { return static_cast<double>(m.steps); });
  agg.trials_with_collision = static_cast<int>(
      std::count_if(trials.begin(), trials.end(),
                    [](const Metrics& m) { return m.collision_step_count > 0; }));
  agg.trials = std::move(trials);
  return agg;
}

AggregateMetrics monte_carlo_trials(const Scenario& scenario, int n_trials,
                                    std::uint64_t base_seed, int threads) {
  if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  scenario.validate();
  std::vector<Metrics> results(static_cast<std::size_t>(n_trials));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int t = next++; t < n_trials; t = next++) {
      Scenario trial = scenario;
      trial.seed = base_seed + static_cast<std::uint64_t>(t);
      results[static_cast<std::size_t>(t)] =
          run(trial, RunOptions{.record_log = false}).metrics;
    }
  };
  const int workers = resolve_threads(threads, n_trials);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  return aggregate(std::move(results));
}

}  // namespace prsbc
