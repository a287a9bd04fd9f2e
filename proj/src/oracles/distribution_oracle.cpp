#include <algorithm>
#include <cmath>
#include <random>

#include "prsbc/distributions.hpp"
#include "prsbc/oracles.hpp"

namespace prsbc::oracles {

std::vector<DistributionCase> distribution_cases(int count,
                                                 std::uint64_t seed) {
  std::vector<DistributionCase> cases;
  cases.push_back({0.3, 0.1, -0.2, 0.1});    // triangle
  cases.push_back({0.0, 0.25, 0.1, 0.0});    // uniform
  cases.push_back({-0.4, 0.02, 0.1, 0.3});   // thin ramps, wide flat top
  std::mt19937 gen(static_cast<std::uint32_t>(seed));
  std::uniform_real_distribution<double> center(-1.0, 1.0);
  std::uniform_real_distribution<double> width(0.0, 0.3);
  while (static_cast<int>(cases.size()) < count)
    cases.push_back({center(gen), width(gen), center(gen), width(gen)});
  cases.resize(static_cast<std::size_t>(std::max(count, 0)));
  return cases;
}

DistributionErrors check_distribution(const DistributionCase& c, int queries,
                                      int n_samples, std::uint64_t seed) {
  std::mt19937 gen(static_cast<std::uint32_t>(seed ^ 0x9e3779b9u));
  std::uniform_real_distribution<double> ui(c.center_i - c.hw_i,
                                            c.center_i + c.hw_i);
  std::uniform_real_distribution<double> uj(c.center_j - c.hw_j,
                                            c.center_j + c.hw_j);
  std::vector<double> diffs(static_cast<std::size_t>(n_samples));
  for (auto& d : diffs) {
    double a = c.hw_i > 0 ? ui(gen) : c.center_i;
    double b = c.hw_j > 0 ? uj(gen) : c.center_j;
    d = a - b;
  }
  std::sort(diffs.begin(), diffs.end());

  auto dist = DifferenceDistribution::from_uniforms(c.center_i, c.hw_i,
                                                    c.center_j, c.hw_j);
  double lo = (c.center_i - c.center_j) - (c.hw_i + c.hw_j);
  double hi = (c.center_i - c.center_j) + (c.hw_i + c.hw_j);

  DistributionErrors err;
  const double n = static_cast<double>(n_samples);
  for (int q = 0; q < queries; ++q) {
    double frac = (q + 0.5) / queries;
    double t = lo + frac * (hi - lo);
    double empirical =
        static_cast<double>(std::upper_bound(diffs.begin(), diffs.end(), t) -
                            diffs.begin()) / n;
    err.max_cdf_error =
        std::max(err.max_cdf_error, std::abs(empirical - trapezoid_cdf(dist, t)));

    double p = (q + 1.0) / (queries + 1.0);
    auto idx = static_cast<std::size_t>(
        std::clamp(std::ceil(p * n) - 1.0, 0.0, n - 1.0));
    err.max_quantile_error = std::max(
        err.max_quantile_error, std::abs(diffs[idx] - trapezoid_inv_cdf(dist, p)));
  }
  return err;
}

double cdf_tolerance(int n_samples) {
  return std::max(2e-3, 2.0 / std::sqrt(static_cast<double>(n_samples)));
}

double quantile_tolerance(int n_samples) {
  return std::max(5e-3, 5.0 / std::sqrt(static_cast<double>(n_samples)));
}

}  // namespace prsbc::oracles
