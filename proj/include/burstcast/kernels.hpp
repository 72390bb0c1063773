#pragma once

// Data-parallel inner loops shared by the statistics, labeling and model code.
//
// Every kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The active variant is picked once at first use from the CPU
// feature bits; BURSTCAST_ISA=scalar in the environment pins the reference
// path. Integer-valued kernels (count_greater) agree bit-for-bit across
// variants; floating reductions agree to rounding.

#include <cstddef>
#include <span>
#include <string_view>

namespace burstcast::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa) noexcept;
bool isa_supported(Isa isa) noexcept;

Isa active_isa() noexcept;
// Overrides the dispatch choice for the rest of the process. Falls back to
// Scalar if the requested ISA is not supported by this CPU.
void set_active_isa(Isa isa) noexcept;

double sum(std::span<const double> x) noexcept;
// Σ (x_i − center)²
double sum_sq_dev(std::span<const double> x, double center) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
// y += a·x
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
// #{i : x_i > cutoff}
std::size_t count_greater(std::span<const double> x, double cutoff) noexcept;
// Σ (x_i − mu_i)²·w_i
double weighted_sq_dist(std::span<const double> x, std::span<const double> mu,
                        std::span<const double> w) noexcept;

namespace scalar {
double sum(std::span<const double> x) noexcept;
double sum_sq_dev(std::span<const double> x, double center) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
std::size_t count_greater(std::span<const double> x, double cutoff) noexcept;
double weighted_sq_dist(std::span<const double> x, std::span<const double> mu,
                        std::span<const double> w) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double sum(std::span<const double> x) noexcept;
double sum_sq_dev(std::span<const double> x, double center) noexcept;
double dot(std::span<const double> a, std::span<const double> b) noexcept;
void axpy(double a, std::span<const double> x, std::span<double> y) noexcept;
std::size_t count_greater(std::span<const double> x, double cutoff) noexcept;
double weighted_sq_dist(std::span<const double> x, std::span<const double> mu,
                        std::span<const double> w) noexcept;
}  // namespace avx2
#endif

}  // namespace burstcast::kernels
