#include "prsbc/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prsbc {

SymmetricUniform::SymmetricUniform(double hw) : half_width(hw) {
  if (!(hw >= 0.0) || !std::isfinite(hw)) {
    throw std::invalid_argument("uniform half width must be finite and >= 0");
  }
}

DifferenceDistribution::DifferenceDistribution(double center,
                                               double inner_half_width,
                                               double outer_half_width)
    : center_(center), inner_(inner_half_width), outer_(outer_half_width) {
  if (!std::isfinite(center) || !std::isfinite(inner_) ||
      !std::isfinite(outer_) || inner_ < 0.0 || inner_ > outer_) {
    throw std::invalid_argument(
        "difference distribution requires 0 <= inner <= outer");
  }
}

DifferenceDistribution DifferenceDistribution::from_uniforms(double center_i,
                                                             double hw_i,
                                                             double center_j,
                                                             double hw_j) {
  return {center_i - center_j, std::abs(hw_i - hw_j), hw_i + hw_j};
}

double DifferenceDistribution::max_abs() const {
  return std::abs(center_) + outer_;
}

namespace {

// Mass in each linear ramp: (s - c) / (2 (s + c)).
double ramp_mass(double inner, double outer) {
  return (outer - inner) / (2.0 * (outer + inner));
}

}  // namespace

double trapezoid_cdf(const DifferenceDistribution& dist, double t) {
  const double s = dist.outer_half_width();
  const double c = dist.inner_half_width();
  const double y = t - dist.center();
  if (s == 0.0) return y >= 0.0 ? 1.0 : 0.0;
  if (y <= -s) return 0.0;
  if (y >= s) return 1.0;
  if (y > -c && y < c) return 0.5 + y / (s + c);
  // Inside a ramp; only reachable when c < s.
  const double denom = 2.0 * (s - c) * (s + c);
  if (y < 0.0) return (s + y) * (s + y) / denom;
  return 1.0 - (s - y) * (s - y) / denom;
}

double trapezoid_inv_cdf(const DifferenceDistribution& dist, double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("probability outside [0, 1]: " + std::to_string(p));
  }
  const double s = dist.outer_half_width();
  const double c = dist.inner_half_width();
  const double mid = dist.center();
  if (s == 0.0) return mid;
  if (p == 0.0) return mid - s;
  if (p == 1.0) return mid + s;
  const double tail = ramp_mass(c, s);
  const double span = 2.0 * (s - c) * (s + c);
  if (p <= tail && tail > 0.0) return mid - s + std::sqrt(p * span);
  if (p >= 1.0 - tail && tail > 0.0) return mid + s - std::sqrt((1.0 - p) * span);
  return mid + (p - 0.5) * (s + c);
}

OffsetPair select_offset(const DifferenceDistribution& dist, double sigma) {
  if (!(sigma >= 0.5 && sigma <= 1.0)) {
    throw std::domain_error("confidence level must lie in [0.5, 1]");
  }
  OffsetPair out;
  out.upper = trapezoid_inv_cdf(dist, sigma);
  out.lower = trapezoid_inv_cdf(dist, 1.0 - sigma);
  if (out.lower > 0.0) {
    out.selected = out.lower;
  } else if (out.upper < 0.0) {
    out.selected = out.upper;
  } else {
    out.selected = 0.0;
  }
  return out;
}

double sample(const SymmetricUniform& dist, Rng& rng) {
  if (dist.half_width == 0.0) return 0.0;
  return (2.0 * unit_uniform(rng) - 1.0) * dist.half_width;
}

double sample(const DifferenceDistribution& dist, Rng& rng) {
  const double a = 0.5 * (dist.outer_half_width() + dist.inner_half_width());
  const double b = 0.5 * (dist.outer_half_width() - dist.inner_half_width());
  const double first = sample(SymmetricUniform{a}, rng);
  const double second = sample(SymmetricUniform{b}, rng);
  return dist.center() + first - second;
}

}  // namespace prsbc
