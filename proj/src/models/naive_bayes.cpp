#include <algorithm>
#include <cmath>
#include <numbers>

#include "burstcast/kernels.hpp"
#include "burstcast/models/estimators.hpp"

namespace burstcast {
namespace {

std::vector<double> softmax_from_logs(std::vector<double> logp) {
  const double m = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double& v : logp) {
    v = std::exp(v - m);
    z += v;
  }
  for (double& v : logp) v /= z;
  return logp;
}

}  // namespace

NaiveBayesModel NaiveBayesModel::fit(const TrainingData& d, const NaiveBayesParams& p) {
  const std::size_t K = static_cast<std::size_t>(d.n_classes);
  const std::size_t F = d.X.cols();
  NaiveBayesModel m;
  m.mean.assign(K, std::vector<double>(F, 0.0));
  m.var.assign(K, std::vector<double>(F, 0.0));
  std::vector<double> mass(K, 0.0);
  for (std::size_t i = 0; i < d.X.rows(); ++i) {
    const auto k = static_cast<std::size_t>(d.classes[i]);
    mass[k] += d.weights[i];
    kernels::axpy(d.weights[i], d.X.row(i), m.mean[k]);
  }
  for (std::size_t k = 0; k < K; ++k)
    if (mass[k] > 0.0)
      for (double& v : m.mean[k]) v /= mass[k];
  for (std::size_t i = 0; i < d.X.rows(); ++i) {
    const auto k = static_cast<std::size_t>(d.classes[i]);
    for (std::size_t f = 0; f < F; ++f) {
      const double dv = d.X(i, f) - m.mean[k][f];
      m.var[k][f] += d.weights[i] * dv * dv;
    }
  }
  for (std::size_t k = 0; k < K; ++k)
    if (mass[k] > 0.0)
      for (double& v : m.var[k]) v /= mass[k];

  // Smoothing scales with the widest feature variance over all rows.
  double total_mass = 0.0;
  std::vector<double> grand(F, 0.0);
  for (std::size_t i = 0; i < d.X.rows(); ++i) {
    total_mass += d.weights[i];
    kernels::axpy(d.weights[i], d.X.row(i), grand);
  }
  for (double& v : grand) v /= total_mass;
  double max_var = 0.0;
  for (std::size_t f = 0; f < F; ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < d.X.rows(); ++i) {
      const double dv = d.X(i, f) - grand[f];
      acc += d.weights[i] * dv * dv;
    }
    max_var = std::max(max_var, acc / total_mass);
  }
  double eps = p.variance_smoothing * max_var;
  if (!(eps > 0.0)) eps = std::max(p.variance_smoothing, 1e-300);
  for (auto& row : m.var)
    for (double& v : row) v += eps;

  m.log_prior.resize(K);
  for (std::size_t k = 0; k < K; ++k) m.log_prior[k] = std::log(mass[k] / total_mass);
  return m;
}

std::vector<double> NaiveBayesModel::predict_proba(std::span<const double> x) const {
  const std::size_t K = log_prior.size();
  std::vector<double> logp(K);
  std::vector<double> inv(x.size());
  for (std::size_t k = 0; k < K; ++k) {
    double log_norm = 0.0;
    for (std::size_t f = 0; f < x.size(); ++f) {
      inv[f] = 1.0 / var[k][f];
      log_norm += std::log(2.0 * std::numbers::pi * var[k][f]);
    }
    logp[k] = log_prior[k] - 0.5 * log_norm - 0.5 * kernels::weighted_sq_dist(x, mean[k], inv);
  }
  return softmax_from_logs(std::move(logp));
}

}  // namespace burstcast
