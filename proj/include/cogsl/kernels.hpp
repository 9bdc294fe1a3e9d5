#pragma once

// Numeric inner loops. Every kernel has a serial reference in
// kernels::serial and an OpenMP version in kernels::omp with the same
// signature. Both walk each output row in the same order, so results are
// bit-identical regardless of thread count. The unqualified kernels::
// functions dispatch to the OpenMP build when it is available.

#include <cstddef>
#include <span>
#include <vector>

#include "cogsl/sparse.hpp"
#include "cogsl/tensor.hpp"

namespace cogsl::kernels {

#define COGSL_KERNEL_DECLS                                                                       \
  /* out = A x,  A sparse (rows x cols), x dense (cols x d) */                                   \
  void spmm(const SparsePattern& a, std::span<const double> vals, const Tensor& x, Tensor& out); \
  /* out = A^T g */                                                                              \
  void spmm_t(const SparsePattern& a, std::span<const double> vals, const Tensor& g,             \
              Tensor& out);                                                                      \
  /* out[e] = <x[row(e)], y[col(e)]> for every stored entry e */                                 \
  void sddmm(const SparsePattern& a, const Tensor& x, const Tensor& y, std::span<double> out);   \
  /* out = a b */                                                                                \
  void gemm(const Tensor& a, const Tensor& b, Tensor& out);                                      \
  /* out = a^T b */                                                                              \
  void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out);                                   \
  /* out = a b^T */                                                                              \
  void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out);                                   \
  /* For every row, the k most cosine-similar other rows (ties: smaller index). */              \
  std::vector<std::vector<Index>> cosine_topk(const Tensor& x, std::size_t k);

namespace serial {
COGSL_KERNEL_DECLS
}
namespace omp {
COGSL_KERNEL_DECLS
}

#undef COGSL_KERNEL_DECLS

void spmm(const SparsePattern& a, std::span<const double> vals, const Tensor& x, Tensor& out);
void spmm_t(const SparsePattern& a, std::span<const double> vals, const Tensor& g, Tensor& out);
void sddmm(const SparsePattern& a, const Tensor& x, const Tensor& y, std::span<double> out);
void gemm(const Tensor& a, const Tensor& b, Tensor& out);
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out);
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out);
std::vector<std::vector<Index>> cosine_topk(const Tensor& x, std::size_t k);

/// Caps OpenMP worker threads; no-op in serial builds.
void set_num_threads(int n);
int num_threads();

}  // namespace cogsl::kernels
