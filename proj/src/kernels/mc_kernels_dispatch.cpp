#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>

#include "prsbc/kernels.hpp"

namespace prsbc::kernels {

const char* to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool is_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PRSBC_BUILD_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa best_available() {
  return is_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

Isa active() {
  static const Isa chosen = [] {
    const char* env = std::getenv("PRSBC_SIMD");
    if (env != nullptr && std::string_view(env) == "scalar") return Isa::scalar;
    return best_available();
  }();
  return chosen;
}

namespace {

void require(Isa isa) {
  if (!is_available(isa)) {
    throw std::runtime_error(std::string("kernel variant unavailable: ") +
                             to_string(isa));
  }
}

}  // namespace

std::size_t count_outside_radius(std::span<const double* const> dx,
                                 std::size_t n, double r2, Isa isa) {
  require(isa);
#if defined(PRSBC_BUILD_AVX2)
  if (isa == Isa::avx2) return detail::count_outside_radius_avx2(dx, n, r2);
#endif
  return detail::count_outside_radius_scalar(dx, 0, n, r2);
}

std::size_t count_barrier_satisfied(std::span<const double* const> dx,
                                    std::span<const double* const> dw,
                                    std::span<const double> velocity,
                                    double two_over_gamma, double r2,
                                    std::size_t n, Isa isa) {
  require(isa);
  if (dx.size() != dw.size() || dx.size() != velocity.size()) {
    throw std::invalid_argument("kernel axis counts disagree");
  }
#if defined(PRSBC_BUILD_AVX2)
  if (isa == Isa::avx2) {
    return detail::count_barrier_satisfied_avx2(dx, dw, velocity,
                                                two_over_gamma, r2, n);
  }
#endif
  return detail::count_barrier_satisfied_scalar(dx, dw, velocity,
                                                two_over_gamma, r2, 0, n);
}

}  // namespace prsbc::kernels
