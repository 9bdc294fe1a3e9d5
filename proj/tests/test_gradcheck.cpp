#include <gtest/gtest.h>

#include <chrono>
#include <set>

#include "cogsl/gradcheck.hpp"
#include "cogsl/ops.hpp"

using namespace cogsl;

TEST(Gradcheck, EveryCasePasses) {
  const auto start = std::chrono::steady_clock::now();
  for (const auto& r : gradcheck::run(gradcheck::registry())) {
    EXPECT_TRUE(r.pass) << r.name << " rel error " << r.rel_error;
    EXPECT_LT(r.rel_error, 1e-4) << r.name;
    EXPECT_GT(r.n_entries, 0u) << r.name;
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::minutes(2));
}

TEST(Gradcheck, CoversEveryOp) {
  std::set<std::string> names;
  for (const auto& c : gradcheck::registry()) names.insert(c.name);
  for (const char* op :
       {"add", "sub", "mul", "div", "scale", "add_row_bias", "sum", "matmul", "matmul_sparse_const", "slice_rows",
        "gather_rows", "relu", "prelu", "elu", "tanh", "sigmoid", "dropout", "row_softmax", "masked_row_softmax",
        "cross_entropy", "row_l2_normalize", "infonce_normalized", "confidence", "gcn_normalize", "spmm", "gcn_layer",
        "gcn_layer_sparse_x", "edge_scores", "sparse_row_softmax", "sparse_embed", "sparse_add", "sparse_scale",
        "sparse_row_scale", "gather_sparse", "sparse_to_dense", "estimator_embed", "estimator_pair_scores",
        "estimator_blend", "fusion_predict_view", "fusion_weights", "fusion_fuse_views", "fusion_attention",
        "mi_embed", "mi_projection", "mi_infonce", "loss_cls", "omega_pipeline", "theta_loss_cls", "phi_mi_total"})
    EXPECT_TRUE(names.count(op)) << "no gradient check for " << op;
}

TEST(Gradcheck, CorruptedGradientIsCaught) {
  auto cases = gradcheck::registry();
  for (auto& c : cases) c.corrupt = 1e-2;
  for (const auto& r : gradcheck::run(cases)) EXPECT_FALSE(r.pass) << r.name;
}

TEST(Gradcheck, HandBuiltCase) {
  gradcheck::Case c;
  c.name = "square";
  c.inputs = {Tensor(2, 2, std::vector<double>{1.0, -2.0, 0.5, 3.0})};
  c.fn = [](nd::Tape&, std::span<const nd::Var> in) { return nd::sum(nd::mul(in[0], in[0])); };
  auto r = gradcheck::check(c);
  EXPECT_TRUE(r.pass);
  EXPECT_LT(r.rel_error, 1e-9);
  EXPECT_EQ(r.n_entries, 4u);
}
