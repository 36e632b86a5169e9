#pragma once

#include <cstddef>
#include <span>

// Dense inner loops used by every network pass and by sample-set metrics.
//
// Each kernel exists twice: `serial` is the reference, `omp` parallelizes the
// outermost independent loop. Both accumulate every output element over the
// reduction index in the same order, so results agree bitwise; tests check
// this. The unqualified dispatchers pick `omp` only when parallelism is enabled
// and the problem is large enough to amortize the thread team.
//
// All matrices are row-major and outputs are overwritten.
namespace tgan::kernels {

namespace serial {
// c[n,m] = a[n,k] * b[k,m]
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
// c[k,m] = a[n,k]^T * b[n,m]
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
// c[n,k] = a[n,m] * b[k,m]^T
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t m, std::size_t k);
// For each 2-D point, index of and squared distance to the nearest center
// (lowest index wins ties).
void nearest_center(std::span<const double> points, std::span<const double> centers,
                    std::span<std::size_t> index, std::span<double> dist2);
}  // namespace serial

namespace omp {
void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t m, std::size_t k);
void nearest_center(std::span<const double> points, std::span<const double> centers,
                    std::span<std::size_t> index, std::span<double> dist2);
}  // namespace omp

// Global switch; deterministic mode turns it off.
void set_parallel(bool enabled);
bool parallel_enabled();

// Minimum multiply-adds before the dispatchers go parallel.
inline constexpr std::size_t kParallelThreshold = 1u << 18;

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m);
void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t m, std::size_t k);
void nearest_center(std::span<const double> points, std::span<const double> centers,
                    std::span<std::size_t> index, std::span<double> dist2);

}  // namespace tgan::kernels
