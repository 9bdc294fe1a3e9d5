#pragma once

// Differentiable operations over Tape values. Each op computes its forward
// value eagerly and records a closure that propagates gradients to its
// operands.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>

#include "cogsl/tape.hpp"

namespace cogsl {
struct ScopeSet;
}

namespace cogsl::nd {

// -- elementwise / shape -----------------------------------------------------
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var scale(Var a, double s);
/// a (N x C) + b (1 x C) broadcast over rows.
Var add_row_bias(Var a, Var b);
/// Sum of all entries, 1 x 1.
Var sum(Var a);
Var matmul(Var a, Var b);
/// x W with a constant sparse left operand.
Var matmul(const CsrMatrix& x, Var w);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var gather_rows(Var a, std::span<const std::size_t> rows);

// -- activations -------------------------------------------------------------
enum class Activation { identity, relu, prelu, elu, tanh, sigmoid };
Activation parse_activation(std::string_view name);
const char* to_string(Activation a);

Var relu(Var x);
/// slope is a 1 x 1 learnable scalar.
Var prelu(Var x, Var slope);
Var elu(Var x, double alpha = 1.0);
Var tanh(Var x);
Var sigmoid(Var x);
/// Dispatches on `kind`; `slope` is only read for prelu.
Var activate(Activation kind, Var x, Var slope = {});

/// Inverted dropout: zeroes each entry with probability `rate`, rescales the
/// rest by 1/(1-rate). rate == 0 returns x unchanged.
Var dropout(Var x, double rate, std::mt19937_64& rng);

// -- normalisation / losses ---------------------------------------------------
/// Row-wise softmax with the row max subtracted first.
Var row_softmax(Var x);
/// Softmax restricted to scope(i) per row; exact zeros elsewhere.
Var masked_row_softmax(Var x, const ScopeSet& scope);
/// Sum over `nodes` of -ln(max(p[i, y_i], 1e-12)). `probs` rows are
/// probability vectors.
Var cross_entropy(Var probs, std::span<const int> labels, std::span<const std::size_t> nodes);
/// Rows scaled to unit L2 norm; all-zero rows stay zero.
Var row_l2_normalize(Var x);
/// Symmetric two-term InfoNCE on row-normalised embeddings a, b (B x d):
/// -1/(2B) sum_i [log softmax_row(S)_ii + log softmax_col(S)_ii],
/// S = a b^T / tau. Cross-view negatives only.
Var infonce_normalized(Var a, Var b, double tau);

/// pi_i = exp(eps * (lambda ln o_m + (1-lambda) ln max(o_m - o_sm, delta))),
/// o_m / o_sm the largest / second largest entries of row i. Output N x 1.
Var confidence(Var probs, double eps, double lambda, double delta);

// -- sparse ------------------------------------------------------------------
/// D^-1/2 (V [+ I]) D^-1/2 with D the row sums of V [+ I]; zero degrees are
/// treated as 1. With self_loops the output pattern includes the diagonal.
SparseVar gcn_normalize(const SparseVar& v, bool self_loops);
/// A x for sparse A.
Var spmm(const SparseVar& a, Var x);
/// normalize(V) H W.
Var gcn_layer(const SparseVar& view, Var h, Var w, bool self_loops = true);
/// normalize(V) X W for a constant sparse feature matrix.
Var gcn_layer(const SparseVar& view, const CsrMatrix& x, Var w, bool self_loops = true);
/// score(e) = u[row(e)] + v[col(e)] + b for every entry of `pattern`;
/// u, v are N x 1 and b is 1 x 1.
SparseVar edge_scores(const PatternPtr& pattern, Var u, Var v, Var b);
/// Softmax over the stored entries of each row. Every row must be non-empty.
SparseVar sparse_row_softmax(const SparseVar& s);
/// Re-expresses s on a superset pattern (new entries are 0).
SparseVar sparse_embed(const SparseVar& s, const PatternPtr& superset);
SparseVar sparse_add(const SparseVar& a, const SparseVar& b);
SparseVar sparse_scale(const SparseVar& a, double s);
/// Row i multiplied by beta[i] (beta N x 1).
SparseVar sparse_row_scale(const SparseVar& a, Var beta);
SparseVar gather_sparse(Var dense, const PatternPtr& pattern);
Var sparse_to_dense(const SparseVar& s);

}  // namespace cogsl::nd
