#include "cogsl/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "cogsl/error.hpp"

namespace cogsl {

namespace {

void check_sizes(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) throw ArgumentError("truth/prediction length mismatch");
  if (truth.empty()) throw ArgumentError("metrics on an empty set");
}

}  // namespace

std::vector<std::vector<std::size_t>> confusion_matrix(std::span<const int> truth,
                                                       std::span<const int> pred,
                                                       std::size_t n_classes) {
  check_sizes(truth, pred);
  std::vector<std::vector<std::size_t>> cm(n_classes, std::vector<std::size_t>(n_classes, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || pred[i] < 0 || static_cast<std::size_t>(truth[i]) >= n_classes ||
        static_cast<std::size_t>(pred[i]) >= n_classes)
      throw ArgumentError("label out of range");
    ++cm[truth[i]][pred[i]];
  }
  return cm;
}

double f1_macro(std::span<const int> truth, std::span<const int> pred, std::size_t n_classes) {
  auto cm = confusion_matrix(truth, pred, n_classes);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    std::size_t tp = cm[c][c], fp = 0, fn = 0;
    for (std::size_t k = 0; k < n_classes; ++k) {
      if (k == c) continue;
      fp += cm[k][c];
      fn += cm[c][k];
    }
    if (tp + fp + fn == 0) continue;
    total += 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
    ++counted;
  }
  return counted ? total / counted : 0.0;
}

double f1_micro(std::span<const int> truth, std::span<const int> pred, std::size_t n_classes) {
  auto cm = confusion_matrix(truth, pred, n_classes);
  std::size_t tp = 0;
  for (std::size_t c = 0; c < n_classes; ++c) tp += cm[c][c];
  // Every error is one FP and one FN, so micro P = micro R = tp / n.
  return static_cast<double>(tp) / truth.size();
}

double accuracy(std::span<const int> truth, std::span<const int> pred) {
  check_sizes(truth, pred);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += truth[i] == pred[i];
  return static_cast<double>(hit) / truth.size();
}

double binary_auc(std::span<const double> scores, std::span<const int> positive) {
  if (scores.size() != positive.size()) throw ArgumentError("score/label length mismatch");
  std::size_t n_pos = 0;
  for (int p : positive) n_pos += p != 0;
  const std::size_t n_neg = positive.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double area = 0.0, tpr_prev = 0.0, fpr_prev = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (positive[order[j]]) ++tp; else ++fp;
      ++j;
    }
    const double tpr = static_cast<double>(tp) / n_pos;
    const double fpr = static_cast<double>(fp) / n_neg;
    area += (fpr - fpr_prev) * (tpr + tpr_prev) / 2.0;
    tpr_prev = tpr;
    fpr_prev = fpr;
    i = j;
  }
  return area;
}

double roc_auc(const Tensor& probs, std::span<const int> truth) {
  if (probs.rows() != truth.size()) throw ArgumentError("probability rows do not match labels");
  const std::size_t c = probs.cols();
  std::vector<double> score(truth.size());
  std::vector<int> pos(truth.size());
  auto one_vs_rest = [&](std::size_t k) {
    for (std::size_t i = 0; i < truth.size(); ++i) {
      score[i] = probs(i, k);
      pos[i] = truth[i] == static_cast<int>(k);
    }
    return binary_auc(score, pos);
  };
  if (c == 2) return one_vs_rest(1);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t k = 0; k < c; ++k) {
    if (std::find(truth.begin(), truth.end(), static_cast<int>(k)) == truth.end()) continue;
    total += one_vs_rest(k);
    ++counted;
  }
  return counted ? total / counted : 0.5;
}

std::vector<int> argmax_rows(const Tensor& probs) {
  std::vector<int> out(probs.rows());
  for (std::size_t i = 0; i < probs.rows(); ++i) {
    auto r = probs.row(i);
    out[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

MetricsReport evaluate_predictions(const Tensor& probs, std::span<const std::size_t> nodes,
                                   std::span<const int> labels, std::size_t n_classes) {
  if (nodes.empty()) throw ArgumentError("evaluation split is empty");
  if (nodes.size() != labels.size()) throw ArgumentError("node/label length mismatch");
  Tensor sub(nodes.size(), probs.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    auto src = probs.row(nodes[i]);
    std::copy(src.begin(), src.end(), sub.row(i).begin());
  }
  const auto pred = argmax_rows(sub);
  MetricsReport r;
  r.n = nodes.size();
  r.f1_macro = f1_macro(labels, pred, n_classes);
  r.f1_micro = f1_micro(labels, pred, n_classes);
  r.accuracy = accuracy(labels, pred);
  r.auc = roc_auc(sub, labels);
  return r;
}

}  // namespace cogsl
