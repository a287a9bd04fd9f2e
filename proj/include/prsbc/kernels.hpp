#pragma once

// Counting kernels for the Monte Carlo safety estimators. Samples are stored
// structure-of-arrays: one contiguous buffer per axis.
//
// Every variant performs the same floating-point operations in the same order
// (no FMA contraction), so all of them return identical counts.

#include <cstddef>
#include <span>

namespace prsbc::kernels {

enum class Isa { scalar, avx2 };

const char* to_string(Isa isa);

/// Widest variant compiled in and supported by this CPU.
Isa best_available();

/// best_available(), unless PRSBC_SIMD=scalar is set in the environment.
Isa active();

bool is_available(Isa isa);

/// Number of samples k with sum_l dx[l][k]^2 >= r2.
std::size_t count_outside_radius(std::span<const double* const> dx,
                                 std::size_t n, double r2, Isa isa = active());

/// Number of samples k with
///   sum_l dx[l][k]^2 + two_over_gamma * dx[l][k] * (velocity[l] + dw[l][k])
///     >= r2,
/// i.e. the barrier condition hdot + gamma h >= 0 divided by gamma, for a
/// pair whose relative nominal velocity is `velocity` and whose relative
/// process noise sample is dw.
std::size_t count_barrier_satisfied(std::span<const double* const> dx,
                                    std::span<const double* const> dw,
                                    std::span<const double> velocity,
                                    double two_over_gamma, double r2,
                                    std::size_t n, Isa isa = active());

namespace detail {

std::size_t count_outside_radius_scalar(std::span<const double* const> dx,
                                        std::size_t begin, std::size_t end,
                                        double r2);
std::size_t count_barrier_satisfied_scalar(std::span<const double* const> dx,
                                           std::span<const double* const> dw,
                                           std::span<const double> velocity,
                                           double two_over_gamma, double r2,
                                           std::size_t begin, std::size_t end);

std::size_t count_outside_radius_avx2(std::span<const double* const> dx,
                                      std::size_t n, double r2);
std::size_t count_barrier_satisfied_avx2(std::span<const double* const> dx,
                                         std::span<const double* const> dw,
                                         std::span<const double> velocity,
                                         double two_over_gamma, double r2,
                                         std::size_t n);

}  // namespace detail
}  // namespace prsbc::kernels
