#include "prsbc/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <array>
#include <set>

namespace prsbc {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ScenarioError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ScenarioError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ScenarioError("bad type for '" + std::string(key) + "' in " + where);
  }
}

template <typename T>
T require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ScenarioError("missing key '" + std::string(key) + "' in " + where);
  }
  return get_or<T>(obj, key, T{}, where);
}

Eigen::VectorXd vector_of(const json& obj, const char* key,
                          const std::string& where) {
  const auto values = require<std::vector<double>>(obj, key, where);
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<Eigen::Index>(values.size()));
}

json to_json_array(const Eigen::VectorXd& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

ModelKind parse_model(const std::string& name) {
  if (name == "single_integrator") return ModelKind::single_integrator;
  if (name == "unicycle_mapped") return ModelKind::unicycle_mapped;
  throw ScenarioError("unknown model_kind '" + name + "'");
}

const char* to_string(ModelKind kind) {
  return kind == ModelKind::unicycle_mapped ? "unicycle_mapped"
                                            : "single_integrator";
}

SafetyMetricKind parse_metric(const std::string& name) {
  if (name == "monte_carlo") return SafetyMetricKind::monte_carlo;
  if (name == "box_overlap") return SafetyMetricKind::box_overlap;
  throw ScenarioError("unknown safety_metric '" + name + "'");
}

}  // namespace

ControllerKind parse_controller(const std::string& name) {
  if (name == "prsbc") return ControllerKind::prsbc_centralized;
  if (name == "prsbc-dec") return ControllerKind::prsbc_decentralized;
  if (name == "sbc") return ControllerKind::sbc;
  if (name == "none") return ControllerKind::none;
  throw ScenarioError("unknown controller '" + name + "'");
}

RadiusConvention parse_convention(const std::string& name) {
  if (name == "paper") return RadiusConvention::paper_d_factor;
  if (name == "sbc-compat") return RadiusConvention::sbc_compat;
  throw ScenarioError("unknown convention '" + name + "'");
}

const char* to_string(RadiusConvention convention) {
  return convention == RadiusConvention::sbc_compat ? "sbc-compat" : "paper";
}

Scenario scenario_from_json(const json& doc) {
  reject_unknown(doc,
                 {"robots", "obstacles", "sigma", "sigma_o", "gamma", "dt",
                  "max_steps", "seed", "controller", "responsibility",
                  "convention", "gain", "goal_tolerance", "neighbor_radius",
                  "safety_metric", "safety_samples", "safety_every", "qp_tol",
                  "qp_max_iter"},
                 "scenario");
  Scenario s;
  if (!doc.contains("robots") || !doc.at("robots").is_array()) {
    throw ScenarioError("scenario needs a 'robots' array");
  }
  for (const auto& r : doc.at("robots")) {
    const std::string where = "robot";
    reject_unknown(r,
                   {"id", "radius", "ctrl_limit", "meas_noise", "proc_noise",
                    "model_kind", "goal", "lookahead", "start", "heading"},
                   where);
    RobotSpec spec;
    spec.id = get_or<int>(r, "id", static_cast<int>(s.robots.size()), where);
    spec.radius = require<double>(r, "radius", where);
    spec.ctrl_limit = require<double>(r, "ctrl_limit", where);
    spec.goal = vector_of(r, "goal", where);
    spec.meas_noise = r.contains("meas_noise")
                          ? vector_of(r, "meas_noise", where)
                          : Eigen::VectorXd::Zero(spec.goal.size());
    spec.proc_noise = r.contains("proc_noise")
                          ? vector_of(r, "proc_noise", where)
                          : Eigen::VectorXd::Zero(spec.goal.size());
    spec.model_kind = parse_model(
        get_or<std::string>(r, "model_kind", "single_integrator", where));
    spec.lookahead = get_or<double>(r, "lookahead", spec.lookahead, where);
    s.robots.push_back(spec);
    s.robot_starts.push_back(vector_of(r, "start", where));
    s.robot_headings.push_back(get_or<double>(r, "heading", 0.0, where));
  }
  if (doc.contains("obstacles")) {
    for (const auto& o : doc.at("obstacles")) {
      const std::string where = "obstacle";
      reject_unknown(o,
                     {"id", "radius", "reported_velocity", "meas_noise",
                      "vel_noise", "start"},
                     where);
      ObstacleSpec spec;
      spec.id = get_or<int>(o, "id", static_cast<int>(s.obstacles.size()), where);
      spec.radius = require<double>(o, "radius", where);
      spec.reported_velocity = vector_of(o, "reported_velocity", where);
      const auto d = spec.reported_velocity.size();
      spec.meas_noise = o.contains("meas_noise") ? vector_of(o, "meas_noise", where)
                                                 : Eigen::VectorXd::Zero(d);
      spec.vel_noise = o.contains("vel_noise") ? vector_of(o, "vel_noise", where)
                                               : Eigen::VectorXd::Zero(d);
      s.obstacles.push_back(spec);
      s.obstacle_starts.push_back(vector_of(o, "start", where));
    }
  }
  const std::string where = "scenario";
  s.sigma = get_or<double>(doc, "sigma", s.sigma, where);
  s.sigma_o = get_or<double>(doc, "sigma_o", s.sigma_o, where);
  s.gamma = get_or<double>(doc, "gamma", s.gamma, where);
  s.dt = get_or<double>(doc, "dt", s.dt, where);
  s.max_steps = get_or<int>(doc, "max_steps", s.max_steps, where);
  s.seed = get_or<std::uint64_t>(doc, "seed", s.seed, where);
  s.controller = parse_controller(get_or<std::string>(doc, "controller", "prsbc", where));
  s.convention = parse_convention(get_or<std::string>(doc, "convention", "paper", where));
  s.gain = get_or<double>(doc, "gain", s.gain, where);
  s.goal_tolerance = get_or<double>(doc, "goal_tolerance", s.goal_tolerance, where);
  if (doc.contains("neighbor_radius")) {
    s.neighbor_radius = get_or<double>(doc, "neighbor_radius", 0.0, where);
  }
  s.safety_metric =
      parse_metric(get_or<std::string>(doc, "safety_metric", "monte_carlo", where));
  s.safety_samples = get_or<int>(doc, "safety_samples", s.safety_samples, where);
  s.safety_every = get_or<int>(doc, "safety_every", s.safety_every, where);
  s.qp.tol = get_or<double>(doc, "qp_tol", s.qp.tol, where);
  s.qp.max_iter = get_or<int>(doc, "qp_max_iter", s.qp.max_iter, where);
  if (!(s.qp.tol > 0.0) || s.qp.max_iter < 1) {
    throw ScenarioError("qp_tol must be > 0 and qp_max_iter >= 1");
  }
  if (doc.contains("responsibility")) {
    const json& p = doc.at("responsibility");
    const auto n = static_cast<Eigen::Index>(s.robots.size());
    if (p.is_number()) {
      s.responsibility = Eigen::MatrixXd::Constant(n, n, p.get<double>());
    } else {
      const auto rows = get_or<std::vector<std::vector<double>>>(
          doc, "responsibility", {}, where);
      s.responsibility.resize(static_cast<Eigen::Index>(rows.size()),
                              rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != s.responsibility.cols()) {
          throw ScenarioError("responsibility rows differ in length");
        }
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          s.responsibility(static_cast<Eigen::Index>(i),
                           static_cast<Eigen::Index>(j)) = rows[i][j];
        }
      }
    }
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario parse error: " + std::string(e.what()));
  }
  return scenario_from_json(doc);
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["robots"] = json::array();
  for (std::size_t i = 0; i < s.robots.size(); ++i) {
    const RobotSpec& r = s.robots[i];
    json jr = {{"id", r.id},
               {"radius", r.radius},
               {"ctrl_limit", r.ctrl_limit},
               {"meas_noise", to_json_array(r.meas_noise)},
               {"proc_noise", to_json_array(r.proc_noise)},
               {"model_kind", to_string(r.model_kind)},
               {"goal", to_json_array(r.goal)},
               {"start", to_json_array(s.robot_starts[i])}};
    if (r.model_kind == ModelKind::unicycle_mapped) {
      jr["lookahead"] = r.lookahead;
      jr["heading"] = i < s.robot_headings.size() ? s.robot_headings[i] : 0.0;
    }
    doc["robots"].push_back(jr);
  }
  doc["obstacles"] = json::array();
  for (std::size_t k = 0; k < s.obstacles.size(); ++k) {
    const ObstacleSpec& o = s.obstacles[k];
    doc["obstacles"].push_back({{"id", o.id},
                                {"radius", o.radius},
                                {"reported_velocity", to_json_array(o.reported_velocity)},
                                {"meas_noise", to_json_array(o.meas_noise)},
                                {"vel_noise", to_json_array(o.vel_noise)},
                                {"start", to_json_array(s.obstacle_starts[k])}});
  }
  doc["sigma"] = s.sigma;
  doc["sigma_o"] = s.sigma_o;
  doc["gamma"] = s.gamma;
  doc["dt"] = s.dt;
  doc["max_steps"] = s.max_steps;
  doc["seed"] = s.seed;
  doc["controller"] = to_string(s.controller);
  doc["convention"] = to_string(s.convention);
  doc["gain"] = s.gain;
  doc["goal_tolerance"] = s.goal_tolerance;
  if (s.neighbor_radius) doc["neighbor_radius"] = *s.neighbor_radius;
  if (s.responsibility.size() != 0) {
    std::vector<std::vector<double>> rows;
    for (Eigen::Index i = 0; i < s.responsibility.rows(); ++i) {
      const Eigen::VectorXd row = s.responsibility.row(i).transpose();
      rows.emplace_back(row.data(), row.data() + row.size());
    }
    doc["responsibility"] = rows;
  }
  doc["safety_metric"] =
      s.safety_metric == SafetyMetricKind::box_overlap ? "box_overlap" : "monte_carlo";
  doc["safety_samples"] = s.safety_samples;
  doc["safety_every"] = s.safety_every;
  doc["qp_tol"] = s.qp.tol;
  doc["qp_max_iter"] = s.qp.max_iter;
  return doc;
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return buf;
}

void write_trajectory_csv(std::ostream& out, const Scenario& scenario,
                          const TrajectoryLog& log) {
  const int d = scenario.dim();
  static constexpr std::array<const char*, 3> kAxes{"x", "y", "z"};
  const auto axis = [&](int l) {
    return l < 3 ? std::string(kAxes[static_cast<std::size_t>(l)])
                 : "a" + std::to_string(l);
  };
  out << "step,time_s,robot_id";
  for (const char* prefix : {"true_", "meas_"}) {
    for (int l = 0; l < d; ++l) out << ',' << prefix << axis(l);
  }
  for (const char* prefix : {"nominal_u", "safe_u"}) {
    for (int l = 0; l < d; ++l) out << ',' << prefix << axis(l);
  }
  out << ",solver_status\n";
  for (const StepRecord& rec : log.steps) {
    for (std::size_t i = 0; i < rec.robots.size(); ++i) {
      const RobotStepRecord& r = rec.robots[i];
      out << rec.step << ',' << format_number(rec.time) << ','
          << scenario.robots[i].id;
      for (const Eigen::VectorXd* v : {&r.true_position, &r.measured_position,
                                       &r.nominal_control, &r.safe_control}) {
        for (Eigen::Index l = 0; l < v->size(); ++l) {
          out << ',' << format_number((*v)(l));
        }
      }
      out << ',' << to_string(r.status) << '\n';
    }
  }
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json stats_json(const FieldStats& st) {
  return {{"min", finite_or_null(st.min)},
          {"mean", finite_or_null(st.mean)},
          {"max", finite_or_null(st.max)}};
}

}  // namespace

json metrics_to_json(const Metrics& m, const json& config) {
  json goals = json::array();
  for (const auto& t : m.goal_reach_times) {
    goals.push_back(t ? json(*t) : json(nullptr));
  }
  return {{"config", config},
          {"min_true_pair_distance_m", finite_or_null(m.min_true_pair_distance)},
          {"min_true_obstacle_distance_m", finite_or_null(m.min_true_obstacle_distance)},
          {"min_empirical_pair_safety", m.min_empirical_pair_safety},
          {"min_empirical_obstacle_safety", m.min_empirical_obstacle_safety},
          {"collision_step_count", m.collision_step_count},
          {"fallback_count", m.fallback_count},
          {"solve_count", m.solve_count},
          {"goal_reach_times_s", goals},
          {"mean_solve_time_per_robot_s", m.mean_solve_time_per_robot},
          {"median_solve_time_per_robot_s", m.median_solve_time_per_robot},
          {"steps", m.steps}};
}

json aggregate_to_json(const AggregateMetrics& agg, const json& config) {
  json trials = json::array();
  json goal_times = json::array();
  for (const Metrics& m : agg.trials) {
    json t = metrics_to_json(m, json::object());
    t.erase("config");
    goal_times.push_back(t["goal_reach_times_s"]);
    trials.push_back(std::move(t));
  }
  return {{"config", config},
          {"n_trials", agg.trials.size()},
          {"trials_with_collision", agg.trials_with_collision},
          {"min_true_pair_distance_m", stats_json(agg.min_true_pair_distance)},
          {"min_true_obstacle_distance_m", stats_json(agg.min_true_obstacle_distance)},
          {"min_empirical_pair_safety", stats_json(agg.min_empirical_pair_safety)},
          {"min_empirical_obstacle_safety", stats_json(agg.min_empirical_obstacle_safety)},
          {"collision_step_count", stats_json(agg.collision_step_count)},
          {"fallback_count", stats_json(agg.fallback_count)},
          {"goal_reach_times_s", goal_times},
          {"mean_solve_time_per_robot_s", stats_json(agg.mean_solve_time_per_robot)},
          {"median_solve_time_per_robot_s", stats_json(agg.median_solve_time_per_robot)},
          {"steps", stats_json(agg.steps)},
          {"trials", trials}};
}

}  // namespace prsbc
