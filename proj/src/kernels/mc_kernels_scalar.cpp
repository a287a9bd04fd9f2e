#include "prsbc/kernels.hpp"

namespace prsbc::kernels::detail {

std::size_t count_outside_radius_scalar(std::span<const double* const> dx,
                                        std::size_t begin, std::size_t end,
                                        double r2) {
  std::size_t count = 0;
  for (std::size_t k = begin; k < end; ++k) {
    double acc = 0.0;
    for (const double* axis : dx) {
      const double d = axis[k];
      acc = acc + d * d;
    }
    count += acc >= r2 ? 1 : 0;
  }
  return count;
}

std::size_t count_barrier_satisfied_scalar(std::span<const double* const> dx,
                                           std::span<const double* const> dw,
                                           std::span<const double> velocity,
                                           double two_over_gamma, double r2,
                                           std::size_t begin, std::size_t end) {
  std::size_t count = 0;
  for (std::size_t k = begin; k < end; ++k) {
    double acc = 0.0;
    for (std::size_t l = 0; l < dx.size(); ++l) {
      const double d = dx[l][k];
      acc = acc + d * d;
      const double drift = velocity[l] + dw[l][k];
      acc = acc + (two_over_gamma * d) * drift;
    }
    count += acc >= r2 ? 1 : 0;
  }
  return count;
}

}  // namespace prsbc::kernels::detail
