#include <algorithm>
#include <cmath>
#include <deque>

#include "burstcast/kernels.hpp"
#include "burstcast/models/estimators.hpp"

namespace burstcast {
namespace {

struct Objective {
  const Matrix& Z;  // standardized features
  std::span<const int> classes;
  std::span<const double> weights;
  std::size_t K;
  std::size_t F;
  double mass;
  double penalty;  // 1 / (C · mass)

  std::size_t size() const { return K * F + K; }

  // θ layout: K rows of F coefficients, then K intercepts.
  double value_and_grad(const std::vector<double>& theta, std::vector<double>& grad) const {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> z(K);
    double loss = 0.0;
    const std::span<const double> th(theta);
    for (std::size_t i = 0; i < Z.rows(); ++i) {
      const double w = weights[i];
      if (w == 0.0) continue;
      const auto x = Z.row(i);
      double zmax = -INFINITY;
      for (std::size_t k = 0; k < K; ++k) {
        z[k] = kernels::dot(x, th.subspan(k * F, F)) + theta[K * F + k];
        zmax = std::max(zmax, z[k]);
      }
      double denom = 0.0;
      for (std::size_t k = 0; k < K; ++k) denom += std::exp(z[k] - zmax);
      const double log_denom = zmax + std::log(denom);
      const auto y = static_cast<std::size_t>(classes[i]);
      loss += w * (log_denom - z[y]);
      for (std::size_t k = 0; k < K; ++k) {
        const double r = w * (std::exp(z[k] - log_denom) - (k == y ? 1.0 : 0.0)) / mass;
        kernels::axpy(r, x, std::span<double>(grad).subspan(k * F, F));
        grad[K * F + k] += r;
      }
    }
    loss /= mass;
    double reg = 0.0;
    for (std::size_t j = 0; j < K * F; ++j) {
      reg += theta[j] * theta[j];
      grad[j] += penalty * theta[j];
    }
    return loss + 0.5 * penalty * reg;
  }
};

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

LogisticModel LogisticModel::fit(const TrainingData& d, const LogisticParams& p) {
  const std::size_t F = d.X.cols();
  const std::size_t n = d.X.rows();
  LogisticModel m;
  m.feature_mean.assign(F, 0.0);
  m.feature_scale.assign(F, 1.0);
  for (std::size_t f = 0; f < F; ++f) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += d.X(i, f);
    const double mu = s / static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += (d.X(i, f) - mu) * (d.X(i, f) - mu);
    const double sd = std::sqrt(v / static_cast<double>(n));
    m.feature_mean[f] = mu;
    m.feature_scale[f] = sd > 0.0 ? sd : 1.0;
  }
  Matrix Z(n, F);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < F; ++f) Z(i, f) = (d.X(i, f) - m.feature_mean[f]) / m.feature_scale[f];

  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) mass += d.weights[i];
  const auto K = static_cast<std::size_t>(d.n_classes);
  const Objective obj{Z, d.classes, d.weights, K, F, mass, 1.0 / (p.inverse_penalty * mass)};

  // L-BFGS with backtracking Armijo line search.
  constexpr std::size_t kMemory = 10;
  std::vector<double> theta(obj.size(), 0.0), grad(obj.size()), next(obj.size()), next_grad(obj.size());
  std::deque<std::vector<double>> s_hist, y_hist;
  std::deque<double> rho_hist;
  double fx = obj.value_and_grad(theta, grad);
  int it = 0;
  for (; it < p.max_iterations; ++it) {
    if (max_abs(grad) < p.tolerance) {
      m.converged = true;
      break;
    }
    std::vector<double> dir(grad);
    std::vector<double> alpha(s_hist.size());
    for (std::size_t j = s_hist.size(); j-- > 0;) {
      alpha[j] = rho_hist[j] * kernels::dot(s_hist[j], dir);
      kernels::axpy(-alpha[j], y_hist[j], dir);
    }
    double gamma = 1.0;
    if (!s_hist.empty()) gamma = kernels::dot(s_hist.back(), y_hist.back()) / kernels::dot(y_hist.back(), y_hist.back());
    for (double& v : dir) v *= gamma;
    for (std::size_t j = 0; j < s_hist.size(); ++j) {
      const double beta = rho_hist[j] * kernels::dot(y_hist[j], dir);
      kernels::axpy(alpha[j] - beta, s_hist[j], dir);
    }
    for (double& v : dir) v = -v;
    double slope = kernels::dot(grad, dir);
    if (!(slope < 0.0)) {
      // Not a descent direction: restart from steepest descent.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      for (std::size_t j = 0; j < dir.size(); ++j) dir[j] = -grad[j];
      slope = kernels::dot(grad, dir);
    }
    double step = s_hist.empty() ? std::min(1.0, 1.0 / std::max(1e-12, max_abs(grad))) : 1.0;
    double fnext = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < theta.size(); ++j) next[j] = theta[j] + step * dir[j];
      fnext = obj.value_and_grad(next, next_grad);
      if (std::isfinite(fnext) && fnext <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;
    std::vector<double> s(theta.size()), y(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      s[j] = next[j] - theta[j];
      y[j] = next_grad[j] - grad[j];
    }
    const double sy = kernels::dot(s, y);
    theta.swap(next);
    grad.swap(next_grad);
    const double prev = fx;
    fx = fnext;
    if (sy > 1e-12) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > kMemory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    if (prev - fx <= 1e-16 * std::max(1.0, std::abs(fx)) && max_abs(grad) < 1e3 * p.tolerance) {
      m.converged = true;
      ++it;
      break;
    }
  }
  m.iterations = it;
  m.coef.assign(K, std::vector<double>(F));
  m.intercept.assign(K, 0.0);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t f = 0; f < F; ++f) m.coef[k][f] = theta[k * F + f];
    m.intercept[k] = theta[K * F + k];
  }
  return m;
}

std::vector<double> LogisticModel::predict_proba(std::span<const double> x) const {
  const std::size_t K = coef.size();
  std::vector<double> z(x.size());
  for (std::size_t f = 0; f < x.size(); ++f) z[f] = (x[f] - feature_mean[f]) / feature_scale[f];
  std::vector<double> out(K);
  double zmax = -INFINITY;
  for (std::size_t k = 0; k < K; ++k) {
    out[k] = kernels::dot(z, coef[k]) + intercept[k];
    zmax = std::max(zmax, out[k]);
  }
  double denom = 0.0;
  for (double& v : out) {
    v = std::exp(v - zmax);
    denom += v;
  }
  for (double& v : out) v /= denom;
  return out;
}

}  // namespace burstcast
