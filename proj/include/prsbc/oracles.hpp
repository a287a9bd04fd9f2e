#pragma once

// Reference checks that do not share code paths with the implementation they
// verify: Monte Carlo for the trapezoid distribution, exhaustive active-set
// enumeration and grid search for the QP, and direct sampling of the barrier
// condition for the chance-constraint certificates.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "prsbc/certificates.hpp"
#include "prsbc/qp.hpp"

namespace prsbc::oracles {

// ---------------------------------------------------------------------------
// Distribution

struct DistributionCase {
  double center_i = 0.0;
  double hw_i = 0.0;
  double center_j = 0.0;
  double hw_j = 0.0;
};

/// 20-ish random parameterizations, always including a triangle (equal widths),
/// a uniform (one width zero) and a strongly asymmetric case.
std::vector<DistributionCase> distribution_cases(int count, std::uint64_t seed);

struct DistributionErrors {
  double max_cdf_error = 0.0;
  double max_quantile_error = 0.0;
};

/// Draws n_samples of x_i - x_j directly from the two uniforms and compares
/// the empirical CDF on a grid of `queries` points across the support, and
/// the empirical quantiles at `queries` levels, against the analytic forms.
DistributionErrors check_distribution(const DistributionCase& c, int queries,
                                      int n_samples, std::uint64_t seed);

/// Tolerances at 10^6 samples are 2e-3 (CDF) and 5e-3 (quantile); fewer
/// samples widen them with the binomial standard error.
double cdf_tolerance(int n_samples);
double quantile_tolerance(int n_samples);

// ---------------------------------------------------------------------------
// QP

/// Random box-and-rows problem. Feasible problems have rows built around an
/// interior point of the box; infeasible ones contain a contradictory pair.
QPProblem random_qp(int n_vars, int n_rows, bool feasible, std::uint64_t seed);

struct ExactOptimum {
  bool feasible = false;
  double objective = 0.0;
  Eigen::VectorXd u;
};

/// Exact optimum by enumerating every linearly independent candidate active
/// set of size <= n and keeping the best feasible projection.
ExactOptimum enumerate_optimum(const QPProblem& problem, double tol = 1e-9);

/// Best feasible grid point over the box (points_per_dim per axis). The grid
/// objective is an upper bound on the optimum; infinity when no grid point
/// is feasible.
double grid_optimum(const QPProblem& problem, int points_per_dim,
                    double tol = 1e-12);

/// Points per axis keeping the grid at about `budget` points.
int grid_points_for(int n_vars, long budget = 1'000'000);

// ---------------------------------------------------------------------------
// Chance constraint

struct PairScenario {
  RobotBelief robot_i;
  RobotBelief robot_j;
  double gamma = 100.0;
  double sigma = 0.9;
  Eigen::VectorXd nominal_i;
  Eigen::VectorXd nominal_j;
};

struct PairGeneratorOptions {
  double gamma_min = 100.0;
  double gamma_max = 100.0;
  double meas_noise_max = 0.1;
  double proc_noise_max = 0.1;
  double sigma = 0.9;
  int dim = 2;
};

/// Random single-integrator pair, collision-free over the full measurement
/// support, with nominal controls driving the two robots toward each other.
PairScenario random_pair(const PairGeneratorOptions& options,
                         std::uint64_t seed);

/// Frequency of hdot + gamma h >= 0 with true positions and process noise
/// drawn from their supports, evaluated sample by sample.
double barrier_frequency(const PairScenario& pair, const Eigen::VectorXd& u_i,
                         const Eigen::VectorXd& u_j, int n_samples,
                         std::uint64_t seed);

/// Minimum admissible frequency: sigma - max(0.01, 3 binomial std errors).
double sufficiency_floor(double sigma, int n_samples);

struct SufficiencyOutcome {
  int cases = 0;
  int solved = 0;
  int failures = 0;
  double worst_margin = 1.0;  // min(frequency - sigma)
  double worst_frequency = 1.0;
  std::vector<double> frequencies;
};

struct SufficiencyOptions {
  PairGeneratorOptions pairs;
  RadiusConvention convention = RadiusConvention::paper_d_factor;
  int n_cases = 100;
  int n_samples = 100000;
  std::uint64_t seed = 1;
  /// Multiplies B before the row is built. -1 injects a sign error.
  double b_sign = 1.0;
};

/// Builds the PrSBC row for each random pair, projects the nominal controls
/// onto it, and samples the barrier event at the projected controls.
SufficiencyOutcome run_sufficiency(const SufficiencyOptions& options);

/// N single integrators whose measurement boxes keep every pair at least
/// sqrt(d) * R_ij + margin apart, with random noise up to the given maxima.
std::vector<RobotBelief> random_clear_team(int n_robots, double margin,
                                           const PairGeneratorOptions& options,
                                           std::uint64_t seed);

// ---------------------------------------------------------------------------
// Self-check driver

struct SelfcheckOptions {
  int mc_samples = 0;  // 0: 10^6 for distributions, 10^5 for sufficiency
  std::uint64_t seed = 1;
  bool inject_b_sign_error = false;
};

struct SuiteReport {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<SuiteReport> run_selfcheck(const SelfcheckOptions& options,
                                       std::ostream* progress = nullptr);

}  // namespace prsbc::oracles
