#include <doctest.h>

#include <cmath>
#include <random>

#include "prsbc/oracles.hpp"
#include "prsbc/qp.hpp"

using namespace prsbc;

namespace {

QPProblem boxed(Eigen::VectorXd ref, double half = 1.0) {
  QPProblem p;
  p.reference = std::move(ref);
  p.lower = Eigen::VectorXd::Constant(p.reference.size(), -half);
  p.upper = Eigen::VectorXd::Constant(p.reference.size(), half);
  return p;
}

HalfspaceConstraint row(Eigen::VectorXd a, double b) {
  HalfspaceConstraint r;
  r.coefficients = std::move(a);
  r.bound = b;
  return r;
}

}  // namespace

TEST_SUITE("qp") {

TEST_CASE("unconstrained reference is returned unchanged") {
  QPProblem p = boxed(Eigen::Vector3d(0.1, -0.2, 0.3));
  QPSolution s = solve(p);
  CHECK(s.status == SolveStatus::optimal);
  CHECK(s.u == p.reference);
  KKTReport k = check_kkt(p, s.u);
  CHECK(k.max_residual() == 0.0);
}

TEST_CASE("single violated row is a half-space projection") {
  QPProblem p = boxed(Eigen::Vector2d(0.5, 0.5));
  Eigen::Vector2d a(1.0, 2.0);
  const double b = 0.3;
  p.rows.push_back(row(a, b));
  QPSolution s = solve(p);
  Eigen::Vector2d expected = p.reference - a * (a.dot(p.reference) - b) / a.squaredNorm();
  CHECK(s.status == SolveStatus::optimal);
  CHECK((s.u - expected).norm() <= 1e-12);
  CHECK(check_kkt(p, s.u).max_residual() <= 1e-10);
}

TEST_CASE("box clips the reference") {
  QPProblem p = boxed(Eigen::Vector2d(2.0, -3.0), 0.5);
  QPSolution s = solve(p);
  CHECK(s.u(0) == doctest::Approx(0.5));
  CHECK(s.u(1) == doctest::Approx(-0.5));
}

TEST_CASE("inscribed box") {
  QPProblem p;
  p.reference = Eigen::VectorXd::Zero(4);
  set_inscribed_box(p, {0.1, 0.2}, 2);
  CHECK(p.upper(0) == doctest::Approx(0.1 / std::sqrt(2.0)));
  CHECK(p.lower(3) == doctest::Approx(-0.2 / std::sqrt(2.0)));
}

TEST_CASE("infeasible problem falls back to zero and reports violated rows") {
  QPProblem p = boxed(Eigen::Vector2d(0.3, 0.1));
  p.rows.push_back(row(Eigen::Vector2d(1.0, 0.0), -0.5));
  p.rows.push_back(row(Eigen::Vector2d(-1.0, 0.0), -0.5));
  p.rows.push_back(row(Eigen::Vector2d(0.0, 1.0), 1.0));
  QPSolution s = solve(p);
  CHECK(s.status == SolveStatus::infeasible_fallback);
  CHECK(s.u.isZero(0.0));
  KKTReport k = check_kkt(p, s.u);
  CHECK(k.violated_rows == std::vector<int>{0, 1});
  CHECK(k.primal_violation == doctest::Approx(0.5));
}

TEST_CASE("row outside the box is infeasible") {
  QPProblem p = boxed(Eigen::Vector2d(0.0, 0.0), 0.1);
  p.rows.push_back(row(Eigen::Vector2d(1.0, 0.0), -0.2));
  CHECK(solve(p).status == SolveStatus::infeasible_fallback);
}

TEST_CASE("dimension mismatch throws") {
  QPProblem p = boxed(Eigen::Vector2d(0.0, 0.0));
  p.rows.push_back(row(Eigen::Vector3d(1.0, 0.0, 0.0), 1.0));
  CHECK_THROWS_AS(solve(p), std::invalid_argument);
  QPProblem q = boxed(Eigen::Vector2d(0.0, 0.0));
  q.upper = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(solve(q), std::invalid_argument);
}

TEST_CASE("agrees with exact enumeration and a grid search") {
  std::mt19937_64 gen(17);
  int feasible = 0;
  for (int c = 0; c < 100; ++c) {
    const int n = 2 + static_cast<int>(gen() % 5);
    const int rows = 1 + static_cast<int>(gen() % 6);
    const bool want_feasible = rows < 2 || gen() % 10 != 0;
    QPProblem p = oracles::random_qp(n, rows, want_feasible, gen());
    QPSolution s = solve(p);
    oracles::ExactOptimum exact = oracles::enumerate_optimum(p);
    REQUIRE((s.status == SolveStatus::optimal) == exact.feasible);
    if (!exact.feasible) continue;
    ++feasible;
    const double obj = objective(p, s.u);
    CHECK(std::abs(obj - exact.objective) <= 1e-7);
    CHECK(check_kkt(p, s.u).max_residual() <= 1e-7);
    CHECK(s.kkt_residual <= 1e-7);
    for (const auto& r : p.rows) CHECK(r.coefficients.dot(s.u) - r.bound <= 1e-7);
    CHECK((s.u - p.upper).maxCoeff() <= 1e-9);
    CHECK((p.lower - s.u).maxCoeff() <= 1e-9);
    if (n <= 4) {
      const double grid = oracles::grid_optimum(p, oracles::grid_points_for(n, 200'000));
      if (std::isfinite(grid)) CHECK(obj <= grid + 1e-3);
    }
  }
  CHECK(feasible > 80);
}

TEST_CASE("four variables, six rows, fine grid") {
  std::mt19937_64 gen(23);
  for (int c = 0; c < 5; ++c) {
    QPProblem p = oracles::random_qp(4, 6, true, gen());
    QPSolution s = solve(p);
    REQUIRE(s.status == SolveStatus::optimal);
    // 0.2 box width at 101 points per axis: 0.002 spacing.
    const double grid = oracles::grid_optimum(p, 101);
    if (std::isfinite(grid)) CHECK(objective(p, s.u) <= grid + 1e-3);
  }
}

TEST_CASE("adding a row never lowers the optimum") {
  std::mt19937_64 gen(29);
  for (int c = 0; c < 50; ++c) {
    QPProblem p = oracles::random_qp(3, 5, true, gen());
    QPProblem fewer = p;
    fewer.rows.pop_back();
    QPSolution a = solve(fewer);
    QPSolution b = solve(p);
    REQUIRE(a.status == SolveStatus::optimal);
    REQUIRE(b.status == SolveStatus::optimal);
    CHECK(objective(fewer, a.u) <= objective(p, b.u) + 1e-12);
  }
}

TEST_CASE("bitwise deterministic") {
  std::mt19937_64 gen(31);
  for (int c = 0; c < 30; ++c) {
    QPProblem p = oracles::random_qp(6, 6, true, gen());
    QPSolution a = solve(p);
    QPSolution b = solve(p);
    CHECK((a.u.array() == b.u.array()).all());
    CHECK(a.iterations == b.iterations);
  }
}

TEST_CASE("degenerate duplicate rows") {
  QPProblem p = boxed(Eigen::Vector2d(0.5, 0.5));
  for (int k = 0; k < 4; ++k) p.rows.push_back(row(Eigen::Vector2d(1.0, 1.0), 0.2));
  p.rows.push_back(row(Eigen::Vector2d(2.0, 2.0), 0.4));
  QPSolution s = solve(p);
  REQUIRE(s.status == SolveStatus::optimal);
  CHECK(s.u(0) == doctest::Approx(0.1));
  CHECK(s.u(1) == doctest::Approx(0.1));
  CHECK(check_kkt(p, s.u).max_residual() <= 1e-9);
}

}
