#pragma once

#include <span>
#include <vector>

namespace burstcast {

struct ClassMetrics {
  int cls = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;  // true instances
};

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool macro = false;
  // Set when some precision, recall or F1 denominator was zero and the
  // value was reported as 0.
  bool zero_division = false;
  std::vector<int> classes;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
  std::vector<ClassMetrics> per_class;
  std::size_t tp = 0, fp = 0, fn = 0;  // for the positive class (binary mode)
};

double f1_from(double precision, double recall) noexcept;

// Binary precision/recall/F1 for `positive_class`. `extra_classes` are added
// to the confusion matrix labels.
Metrics evaluate_binary(std::span<const int> truth, std::span<const int> pred, int positive_class = 1,
                        std::span<const int> extra_classes = {});

// Per-class metrics plus their unweighted (macro) mean over the label set.
Metrics evaluate_macro(std::span<const int> truth, std::span<const int> pred,
                       std::span<const int> extra_classes = {});

}  // namespace burstcast
