#pragma once

#include <cstdint>
#include <random>

namespace prsbc {

using Rng = std::mt19937_64;

/// Uniform double in [0, 1) from the top 53 bits of one generator draw.
inline double unit_uniform(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Zero-mean uniform noise U(-half_width, +half_width). A zero half width is a
/// Dirac at the origin.
struct SymmetricUniform {
  double half_width = 0.0;

  explicit SymmetricUniform(double hw);
  SymmetricUniform() = default;
};

/// Distribution of (x_i - x_j) along one axis when each coordinate is known
/// only up to independent uniform noise around its measurement.
///
/// The density is a symmetric trapezoid: flat on [center - inner, center +
/// inner], linear ramps out to center +/- outer. inner == outer gives a
/// uniform, inner == 0 a triangle, outer == 0 a Dirac.
class DifferenceDistribution {
 public:
  DifferenceDistribution(double center, double inner_half_width,
                         double outer_half_width);

  /// Difference of U(center_i +/- hw_i) and U(center_j +/- hw_j).
  static DifferenceDistribution from_uniforms(double center_i, double hw_i,
                                              double center_j, double hw_j);

  double center() const { return center_; }
  double inner_half_width() const { return inner_; }
  double outer_half_width() const { return outer_; }
  double support_min() const { return center_ - outer_; }
  double support_max() const { return center_ + outer_; }

  /// Largest |t| over the support.
  double max_abs() const;

 private:
  double center_;
  double inner_;
  double outer_;
};

/// Inverse-CDF offsets for one axis. `upper` is the sigma quantile, `lower`
/// the (1 - sigma) quantile, and `selected` is the value closest to zero that
/// still keeps probability sigma on the far side (zero when [lower, upper]
/// straddles the origin).
struct OffsetPair {
  double upper = 0.0;
  double lower = 0.0;
  double selected = 0.0;
};

double trapezoid_cdf(const DifferenceDistribution& dist, double t);

/// Quantile function. p = 0 and p = 1 map to the finite support edges.
/// Throws std::domain_error for p outside [0, 1].
double trapezoid_inv_cdf(const DifferenceDistribution& dist, double p);

/// Throws std::domain_error for sigma outside [0.5, 1].
OffsetPair select_offset(const DifferenceDistribution& dist, double sigma);

double sample(const SymmetricUniform& dist, Rng& rng);
double sample(const DifferenceDistribution& dist, Rng& rng);

}  // namespace prsbc
