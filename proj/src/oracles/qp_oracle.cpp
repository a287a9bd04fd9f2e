#include <cmath>
#include <limits>
#include <random>

#include "prsbc/oracles.hpp"

namespace prsbc::oracles {

QPProblem random_qp(int n_vars, int n_rows, bool feasible,
                    std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  QPProblem p;
  const double half = 0.1;
  p.lower = Eigen::VectorXd::Constant(n_vars, -half);
  p.upper = Eigen::VectorXd::Constant(n_vars, half);
  p.reference.resize(n_vars);
  for (int k = 0; k < n_vars; ++k) p.reference(k) = 0.2 * unit(gen);

  Eigen::VectorXd interior(n_vars);
  for (int k = 0; k < n_vars; ++k) interior(k) = 0.8 * half * unit(gen);

  for (int r = 0; r < n_rows; ++r) {
    HalfspaceConstraint row;
    row.coefficients.resize(n_vars);
    for (int k = 0; k < n_vars; ++k) row.coefficients(k) = normal(gen);
    std::uniform_real_distribution<double> slack(0.0, 0.05);
    row.bound = row.coefficients.dot(interior) + slack(gen);
    row.tag.first = r;
    p.rows.push_back(std::move(row));
  }
  if (!feasible && n_rows >= 2) {
    // a.u <= -1 and -a.u <= -1 cannot both hold
    p.rows[0].bound = -1.0;
    p.rows[1].coefficients = -p.rows[0].coefficients;
    p.rows[1].bound = -1.0;
  }
  return p;
}

namespace {

struct Halfspaces {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
};

Halfspaces stack(const QPProblem& p) {
  const int n = static_cast<int>(p.num_vars());
  const int r = static_cast<int>(p.rows.size());
  Halfspaces h{Eigen::MatrixXd::Zero(r + 2 * n, n),
               Eigen::VectorXd::Zero(r + 2 * n)};
  for (int k = 0; k < r; ++k) {
    h.A.row(k) = p.rows[k].coefficients.transpose();
    h.b(k) = p.rows[k].bound;
  }
  for (int k = 0; k < n; ++k) {
    h.A(r + 2 * k, k) = -1.0;
    h.b(r + 2 * k) = -p.lower(k);
    h.A(r + 2 * k + 1, k) = 1.0;
    h.b(r + 2 * k + 1) = p.upper(k);
  }
  return h;
}

bool is_feasible(const Halfspaces& h, const Eigen::VectorXd& u, double tol) {
  return ((h.A * u - h.b).array() <= tol).all();
}

}  // namespace

ExactOptimum enumerate_optimum(const QPProblem& problem, double tol) {
  const Halfspaces h = stack(problem);
  const int n = static_cast<int>(problem.num_vars());
  const int total = static_cast<int>(h.b.size());
  const Eigen::VectorXd& r = problem.reference;

  ExactOptimum best;
  best.objective = std::numeric_limits<double>::infinity();

  std::vector<int> subset;
  // Depth-first over index subsets in increasing order, size <= n.
  auto visit = [&](auto&& self, int start) -> void {
    const int k = static_cast<int>(subset.size());
    Eigen::VectorXd u = r;
    bool independent = true;
    if (k > 0) {
      Eigen::MatrixXd As(k, n);
      Eigen::VectorXd bs(k);
      for (int a = 0; a < k; ++a) {
        As.row(a) = h.A.row(subset[a]);
        bs(a) = h.b(subset[a]);
      }
      Eigen::MatrixXd gram = As * As.transpose();
      Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
      lu.setThreshold(1e-10);
      if (lu.rank() < k) {
        independent = false;
      } else {
        u = r - As.transpose() * lu.solve(As * r - bs);
      }
    }
    if (!independent) return;  // supersets stay dependent
    if (is_feasible(h, u, tol)) {
      double obj = (u - r).squaredNorm();
      if (obj < best.objective) {
        best.objective = obj;
        best.u = u;
        best.feasible = true;
      }
    }
    if (k == n) return;
    for (int idx = start; idx < total; ++idx) {
      subset.push_back(idx);
      self(self, idx + 1);
      subset.pop_back();
    }
  };
  visit(visit, 0);
  return best;
}

int grid_points_for(int n_vars, long budget) {
  int pts = static_cast<int>(
      std::floor(std::pow(static_cast<double>(budget), 1.0 / n_vars) + 1e-9));
  return std::max(pts, 2);
}

double grid_optimum(const QPProblem& problem, int points_per_dim, double tol) {
  const Halfspaces h = stack(problem);
  const int n = static_cast<int>(problem.num_vars());
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd u(n);
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    for (int k = 0; k < n; ++k) {
      double frac = points_per_dim == 1
                        ? 0.5
                        : static_cast<double>(idx[k]) / (points_per_dim - 1);
      u(k) = problem.lower(k) + frac * (problem.upper(k) - problem.lower(k));
    }
    if (is_feasible(h, u, tol))
      best = std::min(best, (u - problem.reference).squaredNorm());
    int k = 0;
    while (k < n && ++idx[k] == points_per_dim) idx[k++] = 0;
    if (k == n) break;
  }
  return best;
}

}  // namespace prsbc::oracles
