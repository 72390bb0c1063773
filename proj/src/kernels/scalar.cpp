#include "burstcast/kernels.hpp"

namespace burstcast::kernels::scalar {

double sum(std::span<const double> x) noexcept {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double sum_sq_dev(std::span<const double> x, double center) noexcept {
  double acc = 0.0;
  for (double v : x) {
    const double d = v - center;
    acc += d * d;
  }
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy(double a, std::span<const double> x, std::span<double> y) noexcept {
  const std::size_t n = x.size() < y.size() ? x.size() : y.size();
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

std::size_t count_greater(std::span<const double> x, double cutoff) noexcept {
  std::size_t n = 0;
  for (double v : x) n += v > cutoff ? 1 : 0;
  return n;
}

double weighted_sq_dist(std::span<const double> x, std::span<const double> mu,
                        std::span<const double> w) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - mu[i];
    acc += d * d * w[i];
  }
  return acc;
}

}  // namespace burstcast::kernels::scalar
