#include <atomic>
#include <cstdlib>
#include <cstring>

#include "burstcast/kernels.hpp"

namespace burstcast::kernels {
namespace {

struct Table {
  double (*sum)(std::span<const double>) noexcept;
  double (*sum_sq_dev)(std::span<const double>, double) noexcept;
  double (*dot)(std::span<const double>, std::span<const double>) noexcept;
  void (*axpy)(double, std::span<const double>, std::span<double>) noexcept;
  std::size_t (*count_greater)(std::span<const double>, double) noexcept;
  double (*weighted_sq_dist)(std::span<const double>, std::span<const double>,
                             std::span<const double>) noexcept;
};

constexpr Table kScalar{scalar::sum,  scalar::sum_sq_dev,    scalar::dot,
                        scalar::axpy, scalar::count_greater, scalar::weighted_sq_dist};

#if defined(BURSTCAST_HAVE_AVX2_TU)
constexpr Table kAvx2{avx2::sum,  avx2::sum_sq_dev,    avx2::dot,
                      avx2::axpy, avx2::count_greater, avx2::weighted_sq_dist};
#endif

const Table* table_for(Isa isa) noexcept {
#if defined(BURSTCAST_HAVE_AVX2_TU)
  if (isa == Isa::Avx2) return &kAvx2;
#endif
  (void)isa;
  return &kScalar;
}

Isa detect() noexcept {
  const char* env = std::getenv("BURSTCAST_ISA");
  if (env != nullptr && std::strcmp(env, "scalar") == 0) return Isa::Scalar;
  return isa_supported(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<const Table*>& current() noexcept {
  static std::atomic<const Table*> t{table_for(detect())};
  return t;
}

}  // namespace

std::string_view isa_name(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_supported(Isa isa) noexcept {
  if (isa == Isa::Scalar) return true;
#if defined(BURSTCAST_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() noexcept {
  return current().load(std::memory_order_acquire) == &kScalar ? Isa::Scalar : Isa::Avx2;
}

void set_active_isa(Isa isa) noexcept {
  if (!isa_supported(isa)) isa = Isa::Scalar;
  current().store(table_for(isa), std::memory_order_release);
}

double sum(std::span<const double> x) noexcept { return current().load()->sum(x); }

double sum_sq_dev(std::span<const double> x, double center) noexcept {
  return current().load()->sum_sq_dev(x, center);
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return current().load()->dot(a, b);
}

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  current().load()->axpy(a, x, y);
}

std::size_t count_greater(std::span<const double> x, double cutoff) noexcept {
  return current().load()->count_greater(x, cutoff);
}

double weighted_sq_dist(std::span<const double> x, std::span<const double> mu,
                        std::span<const double> w) noexcept {
  return current().load()->weighted_sq_dist(x, mu, w);
}

}  // namespace burstcast::kernels
