#include "tgan/kernels.hpp"

#include <atomic>
#include <limits>

namespace tgan::kernels {

namespace {

std::atomic<bool> g_parallel{true};

// Row bodies shared by both variants so the arithmetic is literally the same.
inline void gemm_nn_row(const double* a, const double* b, double* c, std::size_t i, std::size_t k,
                        std::size_t m) {
  double* crow = c + i * m;
  for (std::size_t j = 0; j < m; ++j) crow[j] = 0.0;
  const double* arow = a + i * k;
  for (std::size_t p = 0; p < k; ++p) {
    const double av = arow[p];
    const double* brow = b + p * m;
    for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
  }
}

inline void gemm_nt_row(const double* a, const double* b, double* c, std::size_t i, std::size_t m,
                        std::size_t k) {
  const double* arow = a + i * m;
  for (std::size_t p = 0; p < k; ++p) {
    const double* brow = b + p * m;
    double acc = 0.0;
    for (std::size_t j = 0; j < m; ++j) acc += arow[j] * brow[j];
    c[i * k + p] = acc;
  }
}

inline void nearest_row(const double* points, const double* centers, std::size_t ncenters,
                        std::size_t i, std::size_t* index, double* dist2) {
  const double x = points[2 * i];
  const double y = points[2 * i + 1];
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = 0;
  for (std::size_t c = 0; c < ncenters; ++c) {
    const double dx = x - centers[2 * c];
    const double dy = y - centers[2 * c + 1];
    const double d = dx * dx + dy * dy;
    if (d < best) {
      best = d;
      best_idx = c;
    }
  }
  index[i] = best_idx;
  dist2[i] = best;
}

}  // namespace

namespace serial {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t i = 0; i < n; ++i) gemm_nn_row(a.data(), b.data(), c.data(), i, k, m);
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  for (std::size_t e = 0; e < k * m; ++e) c[e] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * k;
    const double* brow = b.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      double* crow = c.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t m, std::size_t k) {
  for (std::size_t i = 0; i < n; ++i) gemm_nt_row(a.data(), b.data(), c.data(), i, m, k);
}

void nearest_center(std::span<const double> points, std::span<const double> centers,
                    std::span<std::size_t> index, std::span<double> dist2) {
  const std::size_t n = points.size() / 2;
  for (std::size_t i = 0; i < n; ++i) {
    nearest_row(points.data(), centers.data(), centers.size() / 2, i, index.data(), dist2.data());
  }
}

}  // namespace serial

namespace omp {

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    gemm_nn_row(a.data(), b.data(), c.data(), static_cast<std::size_t>(i), k, m);
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  // Parallel over output rows; each element still sums over i in ascending order.
  const auto out_rows = static_cast<std::ptrdiff_t>(k);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t pp = 0; pp < out_rows; ++pp) {
    const auto p = static_cast<std::size_t>(pp);
    double* crow = c.data() + p * m;
    for (std::size_t j = 0; j < m; ++j) crow[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double av = a[i * k + p];
      const double* brow = b.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t m, std::size_t k) {
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < rows; ++i) {
    gemm_nt_row(a.data(), b.data(), c.data(), static_cast<std::size_t>(i), m, k);
  }
}

void nearest_center(std::span<const double> points, std::span<const double> centers,
                    std::span<std::size_t> index, std::span<double> dist2) {
  const auto n = static_cast<std::ptrdiff_t>(points.size() / 2);
  const std::size_t ncenters = centers.size() / 2;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    nearest_row(points.data(), centers.data(), ncenters, static_cast<std::size_t>(i), index.data(),
                dist2.data());
  }
}

}  // namespace omp

void set_parallel(bool enabled) { g_parallel.store(enabled); }
bool parallel_enabled() { return g_parallel.load(); }

namespace {
bool go_parallel(std::size_t work) { return parallel_enabled() && work >= kParallelThreshold; }
}  // namespace

void gemm_nn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  if (go_parallel(n * k * m)) {
    omp::gemm_nn(a, b, c, n, k, m);
  } else {
    serial::gemm_nn(a, b, c, n, k, m);
  }
}

void gemm_tn(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t k, std::size_t m) {
  if (go_parallel(n * k * m)) {
    omp::gemm_tn(a, b, c, n, k, m);
  } else {
    serial::gemm_tn(a, b, c, n, k, m);
  }
}

void gemm_nt(std::span<const double> a, std::span<const double> b, std::span<double> c,
             std::size_t n, std::size_t m, std::size_t k) {
  if (go_parallel(n * m * k)) {
    omp::gemm_nt(a, b, c, n, m, k);
  } else {
    serial::gemm_nt(a, b, c, n, m, k);
  }
}

void nearest_center(std::span<const double> points, std::span<const double> centers,
                    std::span<std::size_t> index, std::span<double> dist2) {
  if (go_parallel(points.size() * centers.size())) {
    omp::nearest_center(points, centers, index, dist2);
  } else {
    serial::nearest_center(points, centers, index, dist2);
  }
}

}  // namespace tgan::kernels
