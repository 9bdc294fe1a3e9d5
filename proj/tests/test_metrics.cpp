#include <gtest/gtest.h>

#include "cogsl/metrics.hpp"

using namespace cogsl;

namespace {

// Hand-computed 6-sample, 3-class case with two errors.
const std::vector<int> kTruth{0, 0, 1, 1, 2, 2};
const std::vector<int> kPred{0, 1, 1, 1, 2, 0};

}  // namespace

TEST(Metrics, HandCaseConfusionMatrix) {
  auto cm = confusion_matrix(kTruth, kPred, 3);
  std::vector<std::vector<std::size_t>> want{{1, 1, 0}, {0, 2, 0}, {1, 0, 1}};
  EXPECT_EQ(cm, want);
}

TEST(Metrics, HandCaseScores) {
  // per class: P = 1/2, 2/3, 1; R = 1/2, 1, 1/2; F1 = 1/2, 4/5, 2/3.
  EXPECT_NEAR(f1_macro(kTruth, kPred, 3), (0.5 + 0.8 + 2.0 / 3.0) / 3.0, 1e-15);
  EXPECT_NEAR(f1_micro(kTruth, kPred, 3), 4.0 / 6.0, 1e-15);
  EXPECT_NEAR(accuracy(kTruth, kPred), 4.0 / 6.0, 1e-15);
}

TEST(Metrics, PerfectBinaryIsOne) {
  std::vector<int> y{0, 1, 1, 0};
  Tensor probs(4, 2, std::vector<double>{0.9, 0.1, 0.2, 0.8, 0.3, 0.7, 0.6, 0.4});
  std::vector<std::size_t> nodes{0, 1, 2, 3};
  std::vector<int> labels{0, 1, 1, 0};
  auto r = evaluate_predictions(probs, nodes, labels, 2);
  EXPECT_EQ(r.f1_macro, 1.0);
  EXPECT_EQ(r.f1_micro, 1.0);
  EXPECT_EQ(r.accuracy, 1.0);
  EXPECT_EQ(r.auc, 1.0);
  EXPECT_EQ(r.n, 4u);
}

TEST(Metrics, BinaryAucWithTies) {
  std::vector<double> s{0.1, 0.4, 0.4, 0.8};
  std::vector<int> pos{0, 0, 1, 1};
  // Pairs (pos, neg): (0.4,0.1)=1 (0.4,0.4)=0.5 (0.8,*)=1,1 -> 3.5 / 4.
  EXPECT_NEAR(binary_auc(s, pos), 0.875, 1e-15);
  std::vector<int> allpos{1, 1, 1, 1};
  EXPECT_EQ(binary_auc(s, allpos), 0.5);
}

TEST(Metrics, MulticlassAucIsMacroOneVsRest) {
  Tensor p(4, 3, std::vector<double>{0.7, 0.2, 0.1, 0.1, 0.6, 0.3, 0.2, 0.2, 0.6, 0.5, 0.4, 0.1});
  std::vector<int> y{0, 1, 2, 1};
  // class0 scores .7 .1 .2 .5, pos {0}: 1.0; class1 .2 .6 .2 .4 pos {1,3}: 1.0; class2 .1 .3 .6 .1 pos {2}: 1.0
  EXPECT_NEAR(roc_auc(p, y), 1.0, 1e-15);
  std::vector<int> y2{1, 1, 2, 0};
  // class0 .7 .1 .2 .5 pos {3}: beats .1 .2, loses .7 -> 2/3
  // class1 .2 .6 .2 .4 pos {0,1}: (.2 vs .2)=.5 (.2 vs .4)=0 (.6 vs .2)=1 (.6 vs .4)=1 -> 2.5/4
  // class2 .1 .3 .6 .1 pos {2}: 1
  EXPECT_NEAR(roc_auc(p, y2), (2.0 / 3.0 + 0.625 + 1.0) / 3.0, 1e-15);
}

TEST(Metrics, ArgmaxFirstMaximumWins) {
  Tensor p(2, 3, std::vector<double>{0.4, 0.4, 0.2, 0.1, 0.3, 0.6});
  EXPECT_EQ(argmax_rows(p), (std::vector<int>{0, 2}));
}
