#pragma once

#include <Eigen/Dense>
#include <vector>

#include "prsbc/certificates.hpp"

namespace prsbc {

/// min ||u - reference||^2  s.t.  rows: a.u <= b,  lower <= u <= upper.
struct QPProblem {
  Eigen::VectorXd reference;
  std::vector<HalfspaceConstraint> rows;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index num_vars() const { return reference.size(); }
};

/// Box [-alpha_i / sqrt(m), alpha_i / sqrt(m)] per robot, the largest box
/// inside the ball ||u_i|| <= alpha_i.
void set_inscribed_box(QPProblem& problem, const std::vector<double>& limits,
                       int control_dim);

enum class SolveStatus { optimal, infeasible_fallback };

const char* to_string(SolveStatus status);

struct QPSolution {
  Eigen::VectorXd u;
  SolveStatus status = SolveStatus::optimal;
  double kkt_residual = 0.0;
  int iterations = 0;
  double solve_time = 0.0;  // seconds
  /// Multipliers for rows followed by the box (lower then upper per var).
  Eigen::VectorXd multipliers;
};

struct QPOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

/// Solved as a least-distance program with Lawson-Hanson NNLS (an active-set
/// method), followed by a projection onto the final active set. On
/// infeasibility or iteration exhaustion returns u = 0 flagged as
/// infeasible_fallback. Throws std::invalid_argument on dimension mismatch.
QPSolution solve(const QPProblem& problem, const QPOptions& options = {});

struct KKTReport {
  double primal_violation = 0.0;     // max over rows and box of (a.u - b)+
  double stationarity = 0.0;         // ||u - ref + A^T lambda||_inf
  double complementarity = 0.0;      // max |lambda_k (a_k.u - b_k)|
  std::vector<int> violated_rows;    // indices into problem.rows
  Eigen::VectorXd multipliers;

  double max_residual() const;
};

/// Residual report for a candidate point. Multipliers are recovered by
/// nonnegative least squares over the (near) active constraints.
KKTReport check_kkt(const QPProblem& problem, const Eigen::VectorXd& u,
                    double active_tol = 1e-7);

double objective(const QPProblem& problem, const Eigen::VectorXd& u);

}  // namespace prsbc
