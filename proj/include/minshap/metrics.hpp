#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace minshap {

struct Metrics {
  double accuracy = 0.0;
  double f1 = 0.0;
  double type1 = 0.0;
  double type2 = 0.0;
  double fdr = 0.0;
};

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion_counts(std::span<const std::size_t> selected, std::span<const std::size_t> truth, std::size_t p);

/// accuracy = (TP+TN)/p, f1 = 2TP/(2TP+FP+FN), type1 = FP/#nulls,
/// type2 = FN/#support, fdr = FP/max(1, #selected). Empty denominators give 0.
Metrics confusion_metrics(std::span<const std::size_t> selected, std::span<const std::size_t> truth, std::size_t p);

/// Mean pairwise |A_i & A_j| / |A_i | A_j|; two empty sets count as 1.
double jaccard_stability(std::span<const std::vector<std::size_t>> selections);

}  // namespace minshap
