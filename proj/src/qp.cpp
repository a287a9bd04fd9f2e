#include "prsbc/qp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace prsbc {

void set_inscribed_box(QPProblem& problem, const std::vector<double>& limits,
                       int control_dim) {
  const auto n = static_cast<Eigen::Index>(limits.size()) * control_dim;
  problem.lower.resize(n);
  problem.upper.resize(n);
  const double shrink = 1.0 / std::sqrt(static_cast<double>(control_dim));
  for (std::size_t i = 0; i < limits.size(); ++i) {
    const auto start = static_cast<Eigen::Index>(i) * control_dim;
    problem.lower.segment(start, control_dim).setConstant(-limits[i] * shrink);
    problem.upper.segment(start, control_dim).setConstant(limits[i] * shrink);
  }
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::optimal:
      return "optimal";
    case SolveStatus::infeasible_fallback:
      return "infeasible_fallback";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// All constraints in one dense list: user rows, then lower and upper bounds.
struct DenseConstraints {
  Eigen::MatrixXd normals;  // unit rows
  Eigen::VectorXd bounds;
  Eigen::VectorXd scale;    // original row norm (0 for dropped rows)
  bool trivially_infeasible = false;
};

void validate(const QPProblem& problem) {
  const auto n = problem.num_vars();
  if (problem.lower.size() != n || problem.upper.size() != n) {
    throw std::invalid_argument("QP box size does not match the reference");
  }
  for (const auto& row : problem.rows) {
    if (row.coefficients.size() != n) {
      throw std::invalid_argument("QP row length does not match the reference");
    }
  }
  if ((problem.lower.array() > problem.upper.array()).any()) {
    throw std::invalid_argument("QP box has lower > upper");
  }
}

// Row a.u <= b in original scale, index k in [0, rows + 2n).
void original_row(const QPProblem& problem, Eigen::Index k,
                  Eigen::VectorXd& a, double& b) {
  const auto rows = static_cast<Eigen::Index>(problem.rows.size());
  const auto n = problem.num_vars();
  if (k < rows) {
    a = problem.rows[static_cast<std::size_t>(k)].coefficients;
    b = problem.rows[static_cast<std::size_t>(k)].bound;
    return;
  }
  a = Eigen::VectorXd::Zero(n);
  const Eigen::Index v = (k - rows) % n;
  if (k - rows < n) {
    a(v) = -1.0;
    b = -problem.lower(v);
  } else {
    a(v) = 1.0;
    b = problem.upper(v);
  }
}

DenseConstraints densify(const QPProblem& problem, double tol) {
  const auto n = problem.num_vars();
  const auto total = static_cast<Eigen::Index>(problem.rows.size()) + 2 * n;
  DenseConstraints out;
  out.normals.resize(total, n);
  out.bounds.resize(total);
  out.scale.resize(total);
  Eigen::VectorXd a;
  double b = 0.0;
  for (Eigen::Index k = 0; k < total; ++k) {
    original_row(problem, k, a, b);
    const double norm = a.norm();
    if (norm <= 1e-14 || !std::isfinite(b)) {
      // Empty rows are either vacuous or impossible; infinite bounds vacuous.
      if (std::isfinite(b) && b < -tol) out.trivially_infeasible = true;
      out.normals.row(k).setZero();
      out.bounds(k) = kInf;
      out.scale(k) = 0.0;
      continue;
    }
    out.normals.row(k) = a.transpose() / norm;
    out.bounds(k) = b / norm;
    out.scale(k) = norm;
  }
  return out;
}

QPSolution fallback(const QPProblem& problem, int iterations) {
  QPSolution sol;
  sol.u = Eigen::VectorXd::Zero(problem.num_vars());
  sol.status = SolveStatus::infeasible_fallback;
  sol.iterations = iterations;
  sol.multipliers = Eigen::VectorXd::Zero(
      static_cast<Eigen::Index>(problem.rows.size()) + 2 * problem.num_vars());
  sol.kkt_residual = kInf;
  return sol;
}

struct Residuals {
  double primal = 0.0;
  double stationarity = 0.0;
  double complementarity = 0.0;
  std::vector<int> violated_rows;
};

// Multipliers are in original row scale.
Residuals residuals(const QPProblem& problem, const Eigen::VectorXd& u,
                    const Eigen::VectorXd& multipliers) {
  Residuals res;
  const auto total = multipliers.size();
  const auto rows = static_cast<Eigen::Index>(problem.rows.size());
  Eigen::VectorXd grad = u - problem.reference;
  Eigen::VectorXd a;
  double b = 0.0;
  for (Eigen::Index k = 0; k < total; ++k) {
    original_row(problem, k, a, b);
    if (!std::isfinite(b)) continue;
    const double slack = a.dot(u) - b;
    if (slack > 0.0) {
      res.primal = std::max(res.primal, slack);
      if (k < rows) res.violated_rows.push_back(static_cast<int>(k));
    }
    grad += multipliers(k) * a;
    res.complementarity =
        std::max(res.complementarity, std::abs(multipliers(k) * slack));
  }
  res.stationarity = grad.lpNorm<Eigen::Infinity>();
  return res;
}

struct NnlsResult {
  Eigen::VectorXd x;
  int iterations = 0;
  bool converged = true;
};

// Lawson-Hanson: min ||C x - y|| subject to x >= 0. Entering columns are
// chosen by largest gradient, lowest index on ties.
NnlsResult nnls(const Eigen::MatrixXd& C, const Eigen::VectorXd& y,
                int max_iter) {
  const auto k = C.cols();
  NnlsResult out;
  out.x = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd& x = out.x;
  std::vector<bool> passive(static_cast<std::size_t>(k), false);
  std::vector<bool> barred(static_cast<std::size_t>(k), false);
  const double tol = 1e-12 * std::max(1.0, C.norm() * y.norm());

  const auto solve_passive = [&](Eigen::VectorXd& s) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(C.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
      sub.col(static_cast<Eigen::Index>(c)) = C.col(idx[c]);
    }
    const Eigen::VectorXd s_sub = sub.completeOrthogonalDecomposition().solve(y);
    s = Eigen::VectorXd::Zero(k);
    for (std::size_t c = 0; c < idx.size(); ++c) {
      s(idx[c]) = s_sub(static_cast<Eigen::Index>(c));
    }
    return idx;
  };

  for (;;) {
    const Eigen::VectorXd grad = C.transpose() * (y - C * x);
    Eigen::Index best = -1;
    double best_g = tol;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto js = static_cast<std::size_t>(j);
      if (!passive[js] && !barred[js] && grad(j) > best_g) {
        best_g = grad(j);
        best = j;
      }
    }
    if (best < 0) break;
    if (++out.iterations > max_iter) {
      out.converged = false;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;

    Eigen::VectorXd s;
    solve_passive(s);
    if (s(best) <= 0.0) {
      // Column is numerically dependent on the passive set.
      passive[static_cast<std::size_t>(best)] = false;
      barred[static_cast<std::size_t>(best)] = true;
      continue;
    }
    std::fill(barred.begin(), barred.end(), false);

    for (int inner = 0;; ++inner) {
      std::vector<Eigen::Index> idx = solve_passive(s);
      bool positive = true;
      for (auto j : idx) positive = positive && s(j) > 0.0;
      if (positive) {
        x = s;
        break;
      }
      if (inner > 3 * k + 3) {
        out.converged = false;
        return out;
      }
      double alpha = 1.0;
      for (auto j : idx) {
        if (s(j) <= 0.0) alpha = std::min(alpha, x(j) / (x(j) - s(j)));
      }
      x += alpha * (s - x);
      for (auto j : idx) {
        if (x(j) <= 1e-15) {
          x(j) = 0.0;
          passive[static_cast<std::size_t>(j)] = false;
        }
      }
    }
  }
  return out;
}

}  // namespace

QPSolution solve(const QPProblem& problem, const QPOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("tol must be > 0");
  validate(problem);
  const auto start_time = std::chrono::steady_clock::now();
  const auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_time)
        .count();
  };
  const auto give_up = [&](int iterations) {
    QPSolution sol = fallback(problem, iterations);
    sol.solve_time = elapsed();
    return sol;
  };

  const auto n = problem.num_vars();
  const DenseConstraints cons = densify(problem, options.tol);
  if (cons.trivially_infeasible) return give_up(0);

  // With v = u - reference the problem is  min ||v||  s.t.  G v >= h,
  // G = -normals, h = normals * reference - bounds. Its solution comes from
  // min ||E w - f||, w >= 0, with E = [G^T; h^T] and f = e_{n+1}.
  std::vector<Eigen::Index> live;
  for (Eigen::Index k = 0; k < cons.bounds.size(); ++k) {
    if (std::isfinite(cons.bounds(k))) live.push_back(k);
  }
  const auto m = static_cast<Eigen::Index>(live.size());
  Eigen::MatrixXd E(n + 1, m);
  Eigen::VectorXd h(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::Index k = live[static_cast<std::size_t>(c)];
    h(c) = cons.normals.row(k).dot(problem.reference) - cons.bounds(k);
    E.col(c).head(n) = -cons.normals.row(k).transpose();
    E(n, c) = h(c);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(n + 1);
  f(n) = 1.0;

  int iterations = 0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
  if (m > 0) {
    const NnlsResult nn = nnls(E, f, options.max_iter);
    iterations = nn.iterations;
    if (!nn.converged) return give_up(iterations);
    w = nn.x;
  }
  const double denom = 1.0 - h.dot(w);
  if (!(denom > 1e-12)) return give_up(iterations);

  const auto max_violation = [&](const Eigen::VectorXd& v) {
    double worst = 0.0;
    for (Eigen::Index c = 0; c < m; ++c) {
      worst = std::max(worst, h(c) - E.col(c).head(n).dot(v));
    }
    return worst;
  };

  Eigen::VectorXd v = E.topRows(n) * w / denom;
  double violation = max_violation(v);

  // Polish: minimum-norm point of the affine set spanned by the support.
  std::vector<Eigen::Index> support;
  for (Eigen::Index c = 0; c < m; ++c) {
    if (w(c) > 0.0) support.push_back(c);
  }
  if (!support.empty()) {
    const auto s = static_cast<Eigen::Index>(support.size());
    Eigen::MatrixXd Gs(s, n);
    Eigen::VectorXd hs(s);
    for (Eigen::Index a = 0; a < s; ++a) {
      const Eigen::Index c = support[static_cast<std::size_t>(a)];
      Gs.row(a) = E.col(c).head(n).transpose();
      hs(a) = h(c);
    }
    const Eigen::VectorXd polished = Gs.completeOrthogonalDecomposition().solve(hs);
    const double polished_violation = max_violation(polished);
    if (polished_violation <= violation &&
        (polished - v).norm() <= 1e-6 * std::max(1.0, v.norm())) {
      v = polished;
      violation = polished_violation;
    }
  }
  if (violation > options.tol) return give_up(iterations);

  QPSolution sol;
  sol.u = problem.reference + v;
  sol.status = SolveStatus::optimal;
  sol.iterations = iterations;
  sol.multipliers = Eigen::VectorXd::Zero(cons.bounds.size());
  for (Eigen::Index c = 0; c < m; ++c) {
    const Eigen::Index k = live[static_cast<std::size_t>(c)];
    sol.multipliers(k) = w(c) / denom / cons.scale(k);
  }
  const Residuals res = residuals(problem, sol.u, sol.multipliers);
  sol.kkt_residual =
      std::max({res.primal, res.stationarity, res.complementarity});
  sol.solve_time = elapsed();
  return sol;
}

double KKTReport::max_residual() const {
  return std::max({primal_violation, stationarity, complementarity});
}

KKTReport check_kkt(const QPProblem& problem, const Eigen::VectorXd& u,
                    double active_tol) {
  validate(problem);
  if (u.size() != problem.num_vars()) {
    throw std::invalid_argument("candidate size does not match the problem");
  }
  const auto n = problem.num_vars();
  const auto total = static_cast<Eigen::Index>(problem.rows.size()) + 2 * n;

  std::vector<Eigen::Index> near_active;
  Eigen::VectorXd a;
  double b = 0.0;
  for (Eigen::Index k = 0; k < total; ++k) {
    original_row(problem, k, a, b);
    const double norm = a.norm();
    if (norm <= 1e-14 || !std::isfinite(b)) continue;
    if ((a.dot(u) - b) / norm >= -active_tol) near_active.push_back(k);
  }

  Eigen::VectorXd multipliers = Eigen::VectorXd::Zero(total);
  if (!near_active.empty()) {
    Eigen::MatrixXd C(n, static_cast<Eigen::Index>(near_active.size()));
    for (std::size_t c = 0; c < near_active.size(); ++c) {
      original_row(problem, near_active[c], a, b);
      C.col(static_cast<Eigen::Index>(c)) = a;
    }
    const Eigen::VectorXd lam = nnls(C, problem.reference - u, 10 * static_cast<int>(C.cols()) + 10).x;
    for (std::size_t c = 0; c < near_active.size(); ++c) {
      multipliers(near_active[c]) = lam(static_cast<Eigen::Index>(c));
    }
  }

  const Residuals res = residuals(problem, u, multipliers);
  KKTReport report;
  report.primal_violation = res.primal;
  report.stationarity = res.stationarity;
  report.complementarity = res.complementarity;
  report.violated_rows = res.violated_rows;
  report.multipliers = multipliers;
  return report;
}

double objective(const QPProblem& problem, const Eigen::VectorXd& u) {
  return (u - problem.reference).squaredNorm();
}

}  // namespace prsbc
