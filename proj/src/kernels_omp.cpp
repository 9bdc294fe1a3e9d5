#include <algorithm>
#include <cmath>
#include <string>

#include "cogsl/error.hpp"
#include "cogsl/kernels.hpp"

#ifdef COGSL_HAVE_OPENMP
#include <omp.h>
#define COGSL_PARALLEL_FOR _Pragma("omp parallel for schedule(static)")
#else
#define COGSL_PARALLEL_FOR
#endif

namespace cogsl::kernels {

namespace omp {
#include "kernels_impl.inc"
}  // namespace omp

void spmm(const SparsePattern& a, std::span<const double> vals, const Tensor& x, Tensor& out) {
  omp::spmm(a, vals, x, out);
}
void spmm_t(const SparsePattern& a, std::span<const double> vals, const Tensor& g, Tensor& out) {
  omp::spmm_t(a, vals, g, out);
}
void sddmm(const SparsePattern& a, const Tensor& x, const Tensor& y, std::span<double> out) {
  omp::sddmm(a, x, y, out);
}
void gemm(const Tensor& a, const Tensor& b, Tensor& out) { omp::gemm(a, b, out); }
void gemm_tn(const Tensor& a, const Tensor& b, Tensor& out) { omp::gemm_tn(a, b, out); }
void gemm_nt(const Tensor& a, const Tensor& b, Tensor& out) { omp::gemm_nt(a, b, out); }
std::vector<std::vector<Index>> cosine_topk(const Tensor& x, std::size_t k) {
  return omp::cosine_topk(x, k);
}

void set_num_threads(int n) {
#ifdef COGSL_HAVE_OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

int num_threads() {
#ifdef COGSL_HAVE_OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace cogsl::kernels
