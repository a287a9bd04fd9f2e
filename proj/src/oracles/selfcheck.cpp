#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>

#include "prsbc/kernels.hpp"
#include "prsbc/oracles.hpp"

namespace prsbc::oracles {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0,
                double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

SuiteReport distribution_suite(int n_samples, std::uint64_t seed) {
  auto cases = distribution_cases(20, seed);
  DistributionErrors worst;
  for (std::size_t c = 0; c < cases.size(); ++c) {
    auto e = check_distribution(cases[c], 10, n_samples, seed + 101 * c);
    worst.max_cdf_error = std::max(worst.max_cdf_error, e.max_cdf_error);
    worst.max_quantile_error =
        std::max(worst.max_quantile_error, e.max_quantile_error);
  }
  const double tc = cdf_tolerance(n_samples);
  const double tq = quantile_tolerance(n_samples);
  SuiteReport r{"distribution", worst.max_cdf_error <= tc &&
                                    worst.max_quantile_error <= tq, ""};
  r.detail = fmt("max cdf err %.3g (tol %.3g), ", worst.max_cdf_error, tc) +
             fmt("max quantile err %.3g (tol %.3g), samples %.0f",
                 worst.max_quantile_error, tq, n_samples);
  return r;
}

SuiteReport qp_suite(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  double worst_grid_gap = -1e300;
  double worst_exact_gap = 0.0;
  double worst_kkt = 0.0;
  int status_mismatch = 0;
  for (int c = 0; c < 100; ++c) {
    const int n = 2 + static_cast<int>(gen() % 5);
    const int rows = 1 + static_cast<int>(gen() % 6);
    const bool feasible = rows < 2 || gen() % 10 != 0;
    QPProblem p = random_qp(n, rows, feasible, gen());
    QPSolution sol = solve(p);
    ExactOptimum exact = enumerate_optimum(p);
    if ((sol.status == SolveStatus::optimal) != exact.feasible) {
      ++status_mismatch;
      continue;
    }
    if (!exact.feasible) continue;
    const double obj = (sol.u - p.reference).squaredNorm();
    worst_exact_gap = std::max(worst_exact_gap, std::abs(obj - exact.objective));
    const double grid = grid_optimum(p, grid_points_for(n, 200'000));
    if (std::isfinite(grid))
      worst_grid_gap = std::max(worst_grid_gap, obj - grid);
    worst_kkt = std::max(worst_kkt, check_kkt(p, sol.u).max_residual());
  }
  SuiteReport r;
  r.name = "qp";
  r.passed = status_mismatch == 0 && worst_grid_gap <= 1e-3 &&
             worst_exact_gap <= 1e-7 && worst_kkt <= 1e-7;
  r.detail = fmt("solver - grid %.3g, |solver - exact| %.3g, kkt %.3g",
                 worst_grid_gap, worst_exact_gap, worst_kkt) +
             ", status mismatches " + std::to_string(status_mismatch);
  return r;
}

SuiteReport sufficiency_suite(int n_samples, std::uint64_t seed,
                              double b_sign) {
  SufficiencyOptions nominal;
  nominal.n_samples = n_samples;
  nominal.seed = seed;
  nominal.b_sign = b_sign;

  // Low gamma with large process noise makes B the dominant term.
  SufficiencyOptions noisy = nominal;
  noisy.n_cases = 50;
  noisy.seed = seed + 1;
  noisy.pairs.gamma_min = 1.0;
  noisy.pairs.gamma_max = 5.0;
  noisy.pairs.proc_noise_max = 0.5;

  auto a = run_sufficiency(nominal);
  auto b = run_sufficiency(noisy);
  SuiteReport r;
  r.name = "sufficiency";
  r.passed = a.failures == 0 && b.failures == 0;
  r.detail = fmt("gamma=100: worst freq %.4f, ", a.worst_frequency) +
             std::to_string(a.failures) + "/" + std::to_string(a.cases) +
             fmt(" failed; gamma in [1,5]: worst freq %.4f, ",
                 b.worst_frequency) +
             std::to_string(b.failures) + "/" + std::to_string(b.cases) +
             fmt(" failed; floor %.4f",
                 sufficiency_floor(nominal.pairs.sigma, n_samples));
  return r;
}

SuiteReport kernel_suite(std::uint64_t seed) {
  SuiteReport r{"kernels", true, ""};
  if (!kernels::is_available(kernels::Isa::avx2)) {
    r.detail = "avx2 unavailable, scalar only";
    return r;
  }
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int mismatches = 0;
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 1000u, 4099u}) {
    std::vector<std::vector<double>> dx(2, std::vector<double>(n));
    std::vector<std::vector<double>> dw(2, std::vector<double>(n));
    for (auto* set : {&dx, &dw})
      for (auto& axis : *set)
        for (auto& v : axis) v = u(gen);
    std::vector<const double*> px{dx[0].data(), dx[1].data()};
    std::vector<const double*> pw{dw[0].data(), dw[1].data()};
    std::vector<double> vel{u(gen), u(gen)};
    for (double r2 : {0.0, 0.25, 0.5, 2.0}) {
      mismatches +=
          kernels::count_outside_radius(px, n, r2, kernels::Isa::scalar) !=
          kernels::count_outside_radius(px, n, r2, kernels::Isa::avx2);
      mismatches += kernels::count_barrier_satisfied(px, pw, vel, 0.3, r2, n,
                                                     kernels::Isa::scalar) !=
                    kernels::count_barrier_satisfied(px, pw, vel, 0.3, r2, n,
                                                     kernels::Isa::avx2);
    }
  }
  r.passed = mismatches == 0;
  r.detail = "scalar vs avx2 count mismatches " + std::to_string(mismatches);
  return r;
}

}  // namespace

std::vector<SuiteReport> run_selfcheck(const SelfcheckOptions& options,
                                       std::ostream* progress) {
  const int dist_samples = options.mc_samples > 0 ? options.mc_samples : 1'000'000;
  const int suff_samples = options.mc_samples > 0 ? options.mc_samples : 100'000;
  std::vector<SuiteReport> reports;
  auto emit = [&](SuiteReport r) {
    if (progress)
      *progress << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail
                << '\n';
    reports.push_back(std::move(r));
  };
  emit(distribution_suite(dist_samples, options.seed));
  emit(qp_suite(options.seed));
  emit(sufficiency_suite(suff_samples, options.seed,
                         options.inject_b_sign_error ? -1.0 : 1.0));
  emit(kernel_suite(options.seed));
  return reports;
}

}  // namespace prsbc::oracles
