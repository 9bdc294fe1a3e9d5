#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cogsl/tensor.hpp"

namespace cogsl {

struct MetricsReport {
  double f1_macro = 0.0;
  double f1_micro = 0.0;
  double auc = 0.0;
  double accuracy = 0.0;
  std::size_t n = 0;
};

/// confusion[true][pred]
std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> truth,
                                                       std::span<const int> pred,
                                                       std::size_t n_classes);

/// Mean per-class F1 over classes present in truth or prediction.
double f1_macro(std::span<const int> truth, std::span<const int> pred, std::size_t n_classes);
/// Equals accuracy for single-label multi-class prediction.
double f1_micro(std::span<const int> truth, std::span<const int> pred, std::size_t n_classes);
double accuracy(std::span<const int> truth, std::span<const int> pred);

/// Area under the ROC curve of one score vector; tied scores are grouped
/// (trapezoid between distinct thresholds). Returns 0.5 when one class is
/// absent.
double binary_auc(std::span<const double> scores, std::span<const int> positive);

/// Binary: AUC of the class-1 column. Otherwise macro one-vs-rest AUC over
/// classes that occur in truth. probs is n x C, rows aligned with truth.
double roc_auc(const Tensor& probs, std::span<const int> truth);

/// Argmax per row (first maximum wins).
std::vector<int> argmax_rows(const Tensor& probs);

/// All metrics for rows `nodes` of probs.
MetricsReport evaluate_predictions(const Tensor& probs, std::span<const std::size_t> nodes,
                                   std::span<const int> labels, std::size_t n_classes);

}  // namespace cogsl
