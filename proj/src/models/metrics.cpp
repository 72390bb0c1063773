#include "burstcast/models/metrics.hpp"

#include <algorithm>
#include <set>

#include "burstcast/error.hpp"

namespace burstcast {

double f1_from(double precision, double recall) noexcept {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
}

namespace {

Metrics confusion_for(std::span<const int> truth, std::span<const int> pred, std::span<const int> extra,
                      std::initializer_list<int> must) {
  if (truth.size() != pred.size()) fail(ErrorKind::ArityMismatch, "truth and prediction lengths differ");
  std::set<int> labels(truth.begin(), truth.end());
  labels.insert(pred.begin(), pred.end());
  labels.insert(extra.begin(), extra.end());
  labels.insert(must.begin(), must.end());
  Metrics m;
  m.classes.assign(labels.begin(), labels.end());
  const std::size_t K = m.classes.size();
  m.confusion.assign(K, std::vector<std::size_t>(K, 0));
  auto index = [&](int c) {
    return static_cast<std::size_t>(std::lower_bound(m.classes.begin(), m.classes.end(), c) - m.classes.begin());
  };
  for (std::size_t i = 0; i < truth.size(); ++i) ++m.confusion[index(truth[i])][index(pred[i])];

  for (std::size_t k = 0; k < K; ++k) {
    ClassMetrics c;
    c.cls = m.classes[k];
    std::size_t tp = m.confusion[k][k], col = 0, row = 0;
    for (std::size_t j = 0; j < K; ++j) {
      col += m.confusion[j][k];
      row += m.confusion[k][j];
    }
    c.support = row;
    c.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    c.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    c.f1 = f1_from(c.precision, c.recall);
    m.per_class.push_back(c);
  }
  return m;
}

}  // namespace

Metrics evaluate_binary(std::span<const int> truth, std::span<const int> pred, int positive_class,
                        std::span<const int> extra_classes) {
  Metrics m = confusion_for(truth, pred, extra_classes, {positive_class});
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] == positive_class;
    const bool p = pred[i] == positive_class;
    if (t && p) ++m.tp;
    if (!t && p) ++m.fp;
    if (t && !p) ++m.fn;
  }
  const double tp = static_cast<double>(m.tp);
  if (m.tp + m.fp > 0) {
    m.precision = tp / static_cast<double>(m.tp + m.fp);
  } else {
    m.zero_division = true;
  }
  if (m.tp + m.fn > 0) {
    m.recall = tp / static_cast<double>(m.tp + m.fn);
  } else {
    m.zero_division = true;
  }
  if (m.precision + m.recall <= 0.0) m.zero_division = true;
  m.f1 = f1_from(m.precision, m.recall);
  return m;
}

Metrics evaluate_macro(std::span<const int> truth, std::span<const int> pred, std::span<const int> extra_classes) {
  Metrics m = confusion_for(truth, pred, extra_classes, {});
  m.macro = true;
  if (m.per_class.empty()) {
    m.zero_division = true;
    return m;
  }
  for (std::size_t k = 0; k < m.per_class.size(); ++k) {
    const auto& c = m.per_class[k];
    std::size_t col = 0;
    for (std::size_t j = 0; j < m.classes.size(); ++j) col += m.confusion[j][k];
    if (col == 0 || c.support == 0 || c.precision + c.recall <= 0.0) m.zero_division = true;
    m.precision += c.precision;
    m.recall += c.recall;
    m.f1 += c.f1;
  }
  const auto K = static_cast<double>(m.per_class.size());
  m.precision /= K;
  m.recall /= K;
  m.f1 /= K;
  return m;
}

}  // namespace burstcast
