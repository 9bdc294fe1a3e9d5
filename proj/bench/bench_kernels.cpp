// Serial reference kernels against their OpenMP counterparts.

#include <random>

#include <benchmark/benchmark.h>

#include "cogsl/kernels.hpp"

using namespace cogsl;

namespace {

Tensor random_dense(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t(r, c);
  for (double& v : t.data()) v = u(rng);
  return t;
}

CsrMatrix random_sparse(std::size_t n, std::size_t per_row, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> col(0, n - 1);
  std::vector<CsrMatrix::Triplet> t;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < per_row; ++k) t.push_back({static_cast<Index>(i), static_cast<Index>(col(rng)), 1.0});
  return CsrMatrix::from_triplets(n, n, std::move(t));
}

template <bool Parallel>
void BM_spmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  CsrMatrix a = random_sparse(n, 8, 1);
  Tensor x = random_dense(n, 16, 2), out(n, 16);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::spmm(*a.pattern, a.values, x, out);
    else kernels::serial::spmm(*a.pattern, a.values, x, out);
    benchmark::DoNotOptimize(out.data().data());
  }
}

template <bool Parallel>
void BM_sddmm(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  CsrMatrix a = random_sparse(n, 8, 3);
  Tensor x = random_dense(n, 16, 4), y = random_dense(n, 16, 5);
  std::vector<double> out(a.nnz());
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::sddmm(*a.pattern, x, y, out);
    else kernels::serial::sddmm(*a.pattern, x, y, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_gemm_nt(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor a = random_dense(n, 16, 6), b = random_dense(n, 16, 7), out(n, n);
  for (auto _ : state) {
    if constexpr (Parallel) kernels::omp::gemm_nt(a, b, out);
    else kernels::serial::gemm_nt(a, b, out);
    benchmark::DoNotOptimize(out.data().data());
  }
}

template <bool Parallel>
void BM_cosine_topk(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Tensor x = random_dense(n, 32, 8);
  for (auto _ : state) {
    auto r = Parallel ? kernels::omp::cosine_topk(x, 10) : kernels::serial::cosine_topk(x, 10);
    benchmark::DoNotOptimize(r.data());
  }
}

}  // namespace

BENCHMARK(BM_spmm<false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_spmm<true>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_sddmm<false>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_sddmm<true>)->Arg(1000)->Arg(10000);
BENCHMARK(BM_gemm_nt<false>)->Arg(500)->Arg(2000);
BENCHMARK(BM_gemm_nt<true>)->Arg(500)->Arg(2000);
BENCHMARK(BM_cosine_topk<false>)->Arg(500)->Arg(2000);
BENCHMARK(BM_cosine_topk<true>)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
